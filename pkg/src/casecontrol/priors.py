"""Strong hyper Markov prior laws for the finite-covariate logistic model.

Three families live here:

* saturated-table laws of h-form, ``h(cross ratios) * prod theta_xy^(a_xy - 1)``,
  with the Dirichlet as the ``h = 1`` case;
* the conditioned logistic prior obtained by restricting an h-form law to
  the proportional-odds manifold, in its prospective ``(alpha, beta)`` and
  retrospective ``(theta_{X|0}, beta)`` forms;
* general logistic joint laws ``pi(alpha, beta) * pi(theta_X | beta)``, used
  to build priors that break the independence conditions on purpose.

All densities are unnormalized log densities unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Union

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid
from scipy.special import gammaln, logsumexp

from .errors import BoundaryError, NotIdentifiable
from .model import (CovariateSpace, JointTable, LogisticParams, MarginalX, RetroParams,
                    check_identifiability, log_sigmoid, reference_points, softplus, to_prospective)

SHM_THRESHOLD = 1e-8


# --------------------------------------------------------------------------
# hyperparameters


@dataclass(frozen=True)
class PseudoCounts:
    """Prior pseudo-counts ``a_{xy} > 0``, shape ``(m, 2)``."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError("pseudo-counts must have shape (m, 2)")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValueError("pseudo-counts must be finite and strictly positive")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def row_totals(self) -> np.ndarray:
        return self.a.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.a.sum(axis=0)

    def __len__(self):
        return self.a.shape[0]


@dataclass(frozen=True)
class GFunction:
    """Weight function on beta, evaluated as ``log g``.

    ``gaussian`` and ``tabulated`` act on the leading coordinates of beta
    (``len(mean)`` and one, respectively); any further coordinates are flat.
    ``tabulated`` interpolates ``log g`` linearly between nodes and is
    ``-inf`` outside the grid.
    """

    kind: Literal["constant", "gaussian", "tabulated"] = "constant"
    mean: Optional[np.ndarray] = None
    cov: Optional[np.ndarray] = None
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    log_value: float = 0.0
    _chol_inv: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)
    _log_norm: float = field(default=0.0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "constant":
            if not np.isfinite(self.log_value):
                raise ValueError("constant log g must be finite")
        elif self.kind == "gaussian":
            mean = np.atleast_1d(np.array(self.mean, dtype=float))
            cov = np.atleast_2d(np.array(self.cov, dtype=float))
            if cov.shape != (mean.size, mean.size):
                raise ValueError("gaussian g: covariance shape does not match the mean")
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError("gaussian g: covariance must be positive definite") from None
            object.__setattr__(self, "mean", mean)
            object.__setattr__(self, "cov", cov)
            object.__setattr__(self, "_chol_inv", np.linalg.inv(chol))
            log_norm = -0.5 * mean.size * np.log(2 * np.pi) - np.sum(np.log(np.diag(chol)))
            object.__setattr__(self, "_log_norm", float(log_norm))
        elif self.kind == "tabulated":
            grid = np.array(self.grid, dtype=float)
            values = np.array(self.values, dtype=float)
            if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
                raise ValueError("tabulated g needs matching 1-d grid and values (>= 2 nodes)")
            if np.any(np.diff(grid) <= 0):
                raise ValueError("tabulated g grid must be strictly increasing")
            if np.any(values <= 0) or not np.all(np.isfinite(values)):
                raise ValueError("tabulated g values must be positive and finite")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", values)
        else:
            raise ValueError(f"unknown g kind {self.kind!r}")

    @classmethod
    def constant(cls) -> "GFunction":
        return cls("constant")

    @classmethod
    def gaussian(cls, mean, cov) -> "GFunction":
        return cls("gaussian", mean=mean, cov=cov)

    @classmethod
    def tabulated(cls, grid, values) -> "GFunction":
        return cls("tabulated", grid=grid, values=values)

    def log_g(self, beta) -> np.ndarray:
        """``log g`` at beta of shape ``(..., k)``; returns shape ``(...)``."""
        beta = np.asarray(beta, dtype=float)
        if self.kind == "constant":
            return np.full(beta.shape[:-1], self.log_value)
        if self.kind == "gaussian":
            d = self.mean.size
            w = (beta[..., :d] - self.mean) @ self._chol_inv.T
            return self._log_norm - 0.5 * np.sum(w * w, axis=-1)
        b = beta[..., 0]
        out = np.interp(b, self.grid, np.log(self.values))
        return np.where((b < self.grid[0]) | (b > self.grid[-1]), -np.inf, out)


# --------------------------------------------------------------------------
# saturated-table laws


def dirichlet_logdens(theta: Union[JointTable, np.ndarray], a: Union[PseudoCounts, np.ndarray]) -> float:
    """Normalized Dirichlet log density of the table ``theta`` (any shape)."""
    p = np.asarray(theta.probs if isinstance(theta, JointTable) else theta, dtype=float).ravel()
    a = np.asarray(a.a if isinstance(a, PseudoCounts) else a, dtype=float).ravel()
    log_b = float(np.sum(gammaln(a)) - gammaln(a.sum()))
    if np.any(p <= 0):
        e = a[p <= 0] - 1.0
        if np.any(e > 0) and np.any(e < 0):
            return np.nan
        if np.any(e > 0):
            return -np.inf
        if np.any(e < 0):
            return np.inf
    mask = p > 0
    return float(np.sum((a[mask] - 1.0) * np.log(p[mask]))) - log_b


def dirichlet_alphabeta_logdens(params: LogisticParams, a: PseudoCounts) -> float:
    """Unnormalized Dirichlet law of a 2x2 table in ``(alpha, beta)`` coordinates.

    The covariate takes the values 0 and 1 (row order of ``a``).
    """
    if len(a) != 2:
        raise ValueError("the (alpha, beta) form of the Dirichlet law is for 2x2 tables")
    A = a.a
    al = params.alpha
    ab = al + float(params.beta[0])
    return float(al * A[0, 1] + ab * A[1, 1] - A[0].sum() * softplus(al) - A[1].sum() * softplus(ab))


@dataclass(frozen=True)
class SaturatedHFormLaw:
    """Law on an ``m x q`` table with density ``h(cross ratios) prod theta^(a - 1)``.

    ``log_h`` receives the vector of cross ratios
    ``theta_xy theta_x*y* / (theta_xy* theta_x*y)`` for ``x != x*``,
    ``y != y*`` in row-major order.  ``log_h=None`` means ``h = 1``.
    """

    exponents: np.ndarray
    log_h: Optional[Callable[[np.ndarray], float]] = None
    reference: tuple[int, int] = (0, 0)

    def __post_init__(self):
        e = np.array(self.exponents, dtype=float)
        if e.ndim != 2 or min(e.shape) < 2:
            raise ValueError("exponents must form an (m, q) table with m, q >= 2")
        if np.any(e <= 0) or not np.all(np.isfinite(e)):
            raise ValueError("exponents must be positive")
        e.setflags(write=False)
        object.__setattr__(self, "exponents", e)

    def cross_ratios(self, theta: np.ndarray) -> np.ndarray:
        xs, ys = self.reference
        m, q = theta.shape
        out = []
        for x in range(m):
            if x == xs:
                continue
            for y in range(q):
                if y == ys:
                    continue
                out.append(theta[x, y] * theta[xs, ys] / (theta[x, ys] * theta[xs, y]))
        return np.array(out)

    def logdens(self, theta) -> float:
        return hform_logdens(theta, self)


def hform_logdens(theta, law: SaturatedHFormLaw) -> float:
    p = np.asarray(theta.probs if isinstance(theta, JointTable) else theta, dtype=float)
    if p.shape != law.exponents.shape:
        raise ValueError("table shape does not match the law")
    if np.any(p <= 0):
        raise BoundaryError("h-form density is evaluated on interior tables only")
    val = float(np.sum((law.exponents - 1.0) * np.log(p)))
    if law.log_h is not None:
        val += float(law.log_h(law.cross_ratios(p)))
    return val


def dirichlet_law(a) -> SaturatedHFormLaw:
    return SaturatedHFormLaw(np.asarray(a.a if isinstance(a, PseudoCounts) else a, dtype=float))


# --------------------------------------------------------------------------
# conditioned logistic prior


def pro_kernel(alpha, beta, points: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``sum_x a_x1 eta_x - a_x+ log(1 + e^eta_x)`` with ``eta = alpha + beta^T x``.

    ``alpha`` has shape ``S``, ``beta`` shape ``S + (k,)``; broadcasting applies.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    eta = alpha[..., None] + beta @ points.T
    return np.sum(a[:, 1] * eta - a.sum(axis=1) * softplus(eta), axis=-1)


def retro_kernel(log_theta0, beta, points: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``sum_x (a_x+ - 1) log t_x + a_x1 beta^T x - a_+1 log sum_x e^{beta^T x} t_x``."""
    log_theta0 = np.asarray(log_theta0, dtype=float)
    xb = np.asarray(beta, dtype=float) @ points.T
    ax = a.sum(axis=1)
    return (np.sum((ax - 1.0) * log_theta0 + a[:, 1] * xb, axis=-1)
            - a[:, 1].sum() * logsumexp(xb + log_theta0, axis=-1))


@dataclass(frozen=True)
class ConditionedLogisticPrior:
    """Prior on ``(alpha, beta)`` proportional to ``g(beta) prod_x tau_x^a_x1 (1 - tau_x)^a_x0``.

    ``tau_x`` is the logistic probability at x.  The covariate marginal
    ``theta_X`` is Dirichlet(``a_{x+}``) and independent of ``(alpha, beta)``;
    the case probability is Beta(``a_{+1}``, ``a_{+0}``) and independent of
    ``(theta_{X|0}, beta)``.
    """

    space: CovariateSpace
    a: PseudoCounts
    g: GFunction = field(default_factory=GFunction.constant)
    reference: int = 0

    def __post_init__(self):
        if not isinstance(self.a, PseudoCounts):
            object.__setattr__(self, "a", PseudoCounts(self.a))
        if len(self.a) != self.space.size:
            raise ValueError("pseudo-count table does not match the covariate space")
        if not check_identifiability(self.space).identifiable:
            raise NotIdentifiable("conditioned prior needs an identifiable covariate space")
        if not 0 <= self.reference < self.space.size:
            raise ValueError("reference point index out of range")

    # vectorized pieces used by the integrators and the sampler
    def log_ab(self, alpha, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        return self.g.log_g(beta) + pro_kernel(alpha, beta, self.space.points, self.a.a)

    def log_retro(self, log_theta0, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        return self.g.log_g(beta) + retro_kernel(log_theta0, beta, self.space.points, self.a.a)

    def x_concentration(self, beta=None) -> np.ndarray:
        return self.a.row_totals

    def as_joint_law(self) -> "LogisticJointLaw":
        return LogisticJointLaw(self.space, self.log_ab, self.x_concentration, name="conditioned")


def conditioned_prior_logdens_pro(params: LogisticParams, prior: ConditionedLogisticPrior) -> float:
    return float(prior.log_ab(params.alpha, params.beta))


def conditioned_prior_logdens_retro(retro_part, prior: ConditionedLogisticPrior) -> float:
    """Unnormalized log density of ``(theta_{X|0}, beta)``."""
    theta0, beta = retro_part
    t = np.asarray(theta0.probs if isinstance(theta0, MarginalX) else theta0, dtype=float)
    if np.any(t <= 0):
        ax = prior.a.row_totals
        if np.any(ax[t <= 0] > 1):
            return -np.inf
        raise BoundaryError("theta_{X|0} on the simplex boundary")
    return float(prior.log_retro(np.log(t), np.atleast_1d(np.asarray(beta, dtype=float))))


def jacobian_logdet_pro(params: LogisticParams, space: CovariateSpace) -> float:
    """``sum_x [eta_x - 2 log(1 + e^eta_x)]``: log |d theta_{Y|X} / d(alpha, beta, eta)|.

    Drops the constant ``log |det|`` of the design rows of the reference points.
    """
    eta = params.linear_predictor(space)
    return float(np.sum(eta - 2.0 * softplus(eta)))


def jacobian_logdet_retro(params: LogisticParams, theta_x: MarginalX, space: CovariateSpace) -> float:
    """log |d(alpha, beta, theta_X) / d(theta_{X|0}, beta, gamma)|.

    Equal to ``(|X| - 1) log(1 - gamma) - log gamma + sum_x log(1 + e^eta_x)``.
    """
    eta = params.linear_predictor(space)
    gamma = float(np.dot(np.exp(log_sigmoid(eta)), theta_x.probs))
    if not 0.0 < gamma < 1.0:
        raise BoundaryError("case probability at 0 or 1; the retrospective Jacobian diverges")
    return float((space.size - 1) * np.log1p(-gamma) - np.log(gamma) + np.sum(softplus(eta)))


def pseudo_count_construction_logdens(params: LogisticParams, prior: ConditionedLogisticPrior,
                                      reference: Optional[list[int]] = None) -> float:
    """Log density of ``(alpha, beta)`` built from beta priors and binomial pseudo-data.

    For the k+1 reference points ``tau_x ~ Beta(a_x1, a_x0)`` independently,
    mapped to ``(alpha, beta)``; every other point contributes a binomial
    likelihood of ``a_x1`` successes in ``a_x+`` trials (non-integer counts
    allowed through the gamma-function binomial coefficient).
    """
    if prior.g.kind != "constant":
        raise ValueError("the pseudo-count construction reproduces the prior with constant g only")
    space = prior.space
    ref = reference_points(space) if reference is None else list(reference)
    D = space.design_matrix()[ref]
    if len(ref) != space.k + 1 or np.linalg.matrix_rank(D) < space.k + 1:
        raise NotIdentifiable("reference points do not give linearly independent (1, x) rows")
    a = prior.a.a
    eta = params.linear_predictor(space)
    log_tau = log_sigmoid(eta)
    log_1m = log_sigmoid(-eta)
    val = float(np.log(abs(np.linalg.det(D))))
    for i in ref:
        tau = np.exp(log_tau[i])
        val += float(stats.beta.logpdf(tau, a[i, 1], a[i, 0])) + log_tau[i] + log_1m[i]
    for i in range(space.size):
        if i in ref:
            continue
        n, s = a[i].sum(), a[i, 1]
        log_binom = gammaln(n + 1) - gammaln(s + 1) - gammaln(n - s + 1)
        val += float(log_binom + s * log_tau[i] + (n - s) * log_1m[i])
    return val


# --------------------------------------------------------------------------
# general logistic joint laws (used for constructed counterexamples)


@dataclass(frozen=True)
class LogisticJointLaw:
    """Joint law ``pi(alpha, beta) * Dirichlet(theta_X; c(beta))``.

    ``log_ab`` is an unnormalized vectorized log density in ``(alpha, beta)``;
    ``x_concentration(beta)`` gives the Dirichlet parameters of ``theta_X``
    given beta, shape ``beta.shape[:-1] + (m,)``.
    """

    space: CovariateSpace
    log_ab: Callable
    x_concentration: Callable
    name: str = "custom"

    def log_theta_x(self, theta_x: np.ndarray, beta) -> np.ndarray:
        c = np.asarray(self.x_concentration(np.asarray(beta, dtype=float)), dtype=float)
        t = np.asarray(theta_x, dtype=float)
        return (np.sum((c - 1.0) * np.log(t), axis=-1) + gammaln(c.sum(axis=-1))
                - np.sum(gammaln(c), axis=-1))


def independent_gaussian_law(space: CovariateSpace, alpha_sd: float = 1.0, beta_sd: float = 1.0,
                             x_concentration: float = 1.0) -> LogisticJointLaw:
    """Independent gaussian ``alpha``, gaussian ``beta``, Dirichlet ``theta_X``.

    Beta is independent of ``theta_X`` but not of the case probability,
    which mixes beta in through the intercept.
    """
    m = space.size

    def log_ab(alpha, beta):
        beta = np.asarray(beta, dtype=float)
        return (stats.norm.logpdf(alpha, scale=alpha_sd)
                + np.sum(stats.norm.logpdf(beta, scale=beta_sd), axis=-1))

    def conc(beta):
        beta = np.asarray(beta, dtype=float)
        return np.full(beta.shape[:-1] + (m,), float(x_concentration))

    return LogisticJointLaw(space, log_ab, conc, name="independent_gaussian")


def tilted_x_law(prior: ConditionedLogisticPrior, strength: float = 1.0) -> LogisticJointLaw:
    """Conditioned prior on ``(alpha, beta)`` but ``theta_X | beta`` tilted by beta.

    ``theta_X | beta ~ Dirichlet(a_{x+} exp(strength * beta^T x))``, so beta is
    no longer independent of ``theta_X``.
    """
    pts = prior.space.points
    ax = prior.a.row_totals

    def conc(beta):
        beta = np.asarray(beta, dtype=float)
        return ax * np.exp(strength * (beta @ pts.T))

    return LogisticJointLaw(prior.space, prior.log_ab, conc, name="tilted_x")


# --------------------------------------------------------------------------
# strong hyper Markov factorization check


def _lattice_simplex(m: int, count: int, rng) -> np.ndarray:
    return rng.dirichlet(np.full(m, 2.0), size=count)


def _spread_statistic(logf: np.ndarray) -> float:
    """``logf[i, j]`` for margin i, conditional j; max over margin pairs of the spread."""
    worst = 0.0
    for i in range(logf.shape[0]):
        for i2 in range(i + 1, logf.shape[0]):
            diff = logf[i] - logf[i2]
            worst = max(worst, float(np.max(diff) - np.min(diff)))
    return worst


def _table_check(logdens: Callable, shape: tuple[int, int], direction: str, rng) -> float:
    m, q = shape
    if direction == "Y-margin":
        margins = [np.array(v) for v in ([0.5, 0.5], [0.2, 0.8], [0.7, 0.3])] if q == 2 else \
            list(_lattice_simplex(q, 3, rng))
        conds = [np.column_stack([c for c in _lattice_simplex(m, q, rng)]) for _ in range(12)]
        logf = np.empty((len(margins), len(conds)))
        for i, mg in enumerate(margins):
            for j, c in enumerate(conds):
                theta = c * mg[None, :]
                logf[i, j] = logdens(theta) + (m - 1) * np.sum(np.log(mg))
    elif direction == "X-margin":
        margins = list(_lattice_simplex(m, 3, rng))
        conds = [np.vstack([r for r in _lattice_simplex(q, m, rng)]) for _ in range(12)]
        logf = np.empty((len(margins), len(conds)))
        for i, mg in enumerate(margins):
            for j, c in enumerate(conds):
                theta = c * mg[:, None]
                logf[i, j] = logdens(theta) + (q - 1) * np.sum(np.log(mg))
    else:
        raise ValueError(f"direction must be 'Y-margin' or 'X-margin', got {direction!r}")
    return _spread_statistic(logf)


def _logistic_check(law: LogisticJointLaw, direction: str, rng) -> float:
    space = law.space
    m, k = space.size, space.k
    betas = [np.zeros(k)] + [rng.normal(scale=0.8, size=k) for _ in range(3)]
    if direction == "Y-margin":
        gammas = [0.5, 0.2, 0.8]
        conds = [(MarginalX(t), b) for b in betas for t in _lattice_simplex(m, 3, rng)]
        logf = np.empty((len(gammas), len(conds)))
        for i, g in enumerate(gammas):
            for j, (t0, b) in enumerate(conds):
                tx, params = to_prospective(RetroParams(g, t0, b), space)
                logf[i, j] = (law.log_ab(params.alpha, params.beta)
                              + law.log_theta_x(tx.probs, params.beta)
                              + jacobian_logdet_retro(params, tx, space))
    elif direction == "X-margin":
        margins = list(_lattice_simplex(m, 3, rng))
        conds = [(al, b) for b in betas for al in (-1.0, 0.0, 0.7)]
        logf = np.empty((len(margins), len(conds)))
        for i, tx in enumerate(margins):
            for j, (al, b) in enumerate(conds):
                logf[i, j] = law.log_ab(al, b) + law.log_theta_x(tx, b)
    else:
        raise ValueError(f"direction must be 'Y-margin' or 'X-margin', got {direction!r}")
    return _spread_statistic(logf)


def shm_factorization_check(law, direction: str = "Y-margin", seed: int = 20240601,
                            shape: Optional[tuple[int, int]] = None) -> float:
    """Largest departure from factorization of the density into margin x conditional.

    The density of (margin, conditional) is evaluated on a fixed set of
    margins and conditionals (including the change-of-variables Jacobian);
    for each pair of margins, the spread across conditionals of the log
    density difference is computed.  Zero (up to rounding) for a strong
    hyper Markov law.  ``law`` may be a :class:`SaturatedHFormLaw`, a
    :class:`ConditionedLogisticPrior`, a :class:`LogisticJointLaw`, or any
    callable taking a table (then ``shape`` is required).
    """
    rng = np.random.Generator(np.random.Philox(seed))
    if isinstance(law, ConditionedLogisticPrior):
        law = law.as_joint_law()
    if isinstance(law, LogisticJointLaw):
        return _logistic_check(law, direction, rng)
    if isinstance(law, SaturatedHFormLaw):
        return _table_check(law.logdens, law.exponents.shape, direction, rng)
    if callable(law):
        if shape is None:
            raise ValueError("a table-density callable needs the table shape")
        return _table_check(law, shape, direction, rng)
    raise TypeError(f"cannot check factorization of {type(law).__name__}")


# --------------------------------------------------------------------------
# properness probe


@dataclass
class PropernessReport:
    assessed: bool
    masses: list[float]
    bounds: list[float]
    proper: Optional[bool]
    warning: Optional[str]


SMALL_CASE_PSEUDO_COUNT = 1.0


def properness_probe(prior: ConditionedLogisticPrior, bounds=(15.0, 30.0), nodes: int = 241) -> PropernessReport:
    """Mass of the unnormalized prior on growing (alpha, beta) boxes (k = 1 only).

    The prior is reported proper when the mass stops growing (relative change
    below 1e-3).  With constant g a warning is always attached, since
    integrability then rests entirely on the pseudo-counts.
    """
    warning = None
    if prior.g.kind == "constant":
        warning = "g is constant: properness depends on the pseudo-counts alone"
        if prior.a.col_totals[1] < SMALL_CASE_PSEUDO_COUNT:
            warning += f" (a_+1 = {prior.a.col_totals[1]:g} is small; the limit a_+1 -> 0 is improper)"
    if prior.space.k != 1:
        return PropernessReport(False, [], list(bounds), None, warning)
    masses = []
    for B in bounds:
        grid = np.linspace(-B, B, nodes)
        A, Bt = np.meshgrid(grid, grid, indexing="ij")
        lf = prior.log_ab(A, Bt[..., None])
        top = np.max(lf)
        inner = trapezoid(np.exp(lf - top), grid, axis=1)
        masses.append(float(np.exp(top) * trapezoid(inner, grid)))
    rel = abs(masses[-1] - masses[0]) / masses[-1] if masses[-1] > 0 else np.inf
    return PropernessReport(True, masses, list(bounds), bool(rel < 1e-3), warning)


__all__ = [
    "PseudoCounts", "GFunction", "SaturatedHFormLaw", "ConditionedLogisticPrior", "LogisticJointLaw",
    "PropernessReport", "SHM_THRESHOLD", "dirichlet_logdens", "dirichlet_alphabeta_logdens",
    "hform_logdens", "dirichlet_law", "pro_kernel", "retro_kernel", "conditioned_prior_logdens_pro",
    "conditioned_prior_logdens_retro", "jacobian_logdet_pro", "jacobian_logdet_retro",
    "pseudo_count_construction_logdens", "independent_gaussian_law", "tilted_x_law",
    "shm_factorization_check", "properness_probe",
]
