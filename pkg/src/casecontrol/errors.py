"""Exception types raised by the fitting and integration routines."""


class CaseControlError(Exception):
    """Base class for all package errors."""


class BoundaryError(CaseControlError, ValueError):
    """A parameter sits on the boundary of the simplex (or at infinity)."""


class NotIdentifiable(CaseControlError, ValueError):
    """The covariate design does not identify the log odds ratio."""


class SeparationDetected(CaseControlError, ArithmeticError):
    """The likelihood is monotone; the MLE does not exist."""


class SingularInformation(CaseControlError, ArithmeticError):
    """The weighted design is rank deficient at the current iterate."""


class NonConvergence(CaseControlError, RuntimeError):
    """An optimizer hit its iteration cap."""


class EmptyArm(CaseControlError, ValueError):
    """Either the case sample or the control sample is empty."""


class AllDegenerate(CaseControlError, ValueError):
    """Every stratum is concordant (all cases or all controls)."""


class MassEscape(CaseControlError, RuntimeError):
    """Posterior mass reaches the edge of the integration grid."""


class AllRejected(CaseControlError, RuntimeError):
    """The Metropolis sampler rejected (almost) every proposal."""


class DataFormatError(CaseControlError, ValueError):
    """A dataset or document could not be parsed."""
