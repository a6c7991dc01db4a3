"""Finite-covariate logistic joint model.

A joint distribution on ``X x {0, 1}`` with ``X`` a finite set of points in
R^k and a proportional-odds conditional for ``Y | X`` can be written in two
coordinate systems:

* prospective: ``(theta_X, alpha, beta)`` -- covariate marginal plus the
  logistic intercept and slope;
* retrospective: ``(gamma, theta_{X|Y=0}, beta)`` -- case probability,
  control covariate distribution, and the same slope.

This module holds the value types for both, the maps between them, and the
exponential tilt that turns the control distribution into the case
distribution.  Everything here works on the natural probability scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import BoundaryError, NotIdentifiable

NORMALIZATION_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def softplus(eta):
    """``log(1 + exp(eta))`` without overflow."""
    return np.logaddexp(0.0, eta)


def log_sigmoid(eta):
    """``log(exp(eta) / (1 + exp(eta)))`` without overflow."""
    return -np.logaddexp(0.0, -np.asarray(eta, dtype=float))


@dataclass(frozen=True)
class CovariateSpace:
    """Ordered, finite set of distinct covariate vectors.

    Points are kept exactly as given.  Two points are equal only if their
    float64 representations are bitwise identical.
    """

    points: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("covariate space needs a non-empty (m, k) array of points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("covariate points must be finite")
        index = {}
        for i, row in enumerate(pts):
            key = row.tobytes()
            if key in index:
                raise ValueError(f"duplicate covariate point {row.tolist()}")
            index[key] = i
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "_index", index)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CovariateSpace):
            return NotImplemented
        return self.points.shape == other.points.shape and self.points.tobytes() == other.points.tobytes()

    def __hash__(self) -> int:
        return hash((self.points.shape, self.points.tobytes()))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.size

    def index_of(self, x) -> int:
        key = np.asarray(x, dtype=float).reshape(self.k).tobytes()
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"point {list(np.ravel(x))} is not in the covariate space") from None

    def design_matrix(self) -> np.ndarray:
        """Rows ``(1, x^T)`` for every point, shape ``(m, k + 1)``."""
        return np.column_stack([np.ones(self.size), self.points])

    @property
    def identifiable(self) -> bool:
        return check_identifiability(self).identifiable


@dataclass(frozen=True)
class LogisticParams:
    alpha: float
    beta: np.ndarray

    def __post_init__(self):
        beta = np.atleast_1d(np.array(self.beta, dtype=float))
        if beta.ndim != 1:
            raise ValueError("beta must be a vector")
        alpha = float(self.alpha)
        if not (np.isfinite(alpha) and np.all(np.isfinite(beta))):
            raise ValueError("logistic parameters must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", _frozen(beta))

    def linear_predictor(self, space: CovariateSpace) -> np.ndarray:
        return self.alpha + space.points @ self.beta


@dataclass(frozen=True)
class MarginalX:
    """A probability vector over the points of a covariate space."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, m: int) -> "MarginalX":
        return cls(np.full(m, 1.0 / m))


@dataclass(frozen=True)
class RetroParams:
    gamma: float
    theta_x_given_0: MarginalX
    beta: np.ndarray

    def __post_init__(self):
        gamma = float(self.gamma)
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie strictly inside (0, 1)")
        t0 = self.theta_x_given_0
        if not isinstance(t0, MarginalX):
            t0 = MarginalX(t0)
        beta = np.atleast_1d(np.array(self.beta, dtype=float))
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "theta_x_given_0", t0)
        object.__setattr__(self, "beta", _frozen(beta))


@dataclass(frozen=True)
class JointTable:
    """Cell probabilities ``theta_{xy}``, shape ``(m, 2)``; column = y."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("joint table must have shape (m, 2)")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("cell probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"cell probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def theta_x(self) -> MarginalX:
        return MarginalX(self.probs.sum(axis=1))

    @property
    def gamma(self) -> float:
        return float(self.probs[:, 1].sum())

    def x_given_y(self, y: int) -> MarginalX:
        col = self.probs[:, y]
        total = col.sum()
        if total <= 0:
            raise BoundaryError(f"P(Y={y}) is zero; X | Y={y} is undefined")
        return MarginalX(col / total)

    @classmethod
    def from_prospective(cls, theta_x: MarginalX, params: LogisticParams, space: CovariateSpace) -> "JointTable":
        eta = params.linear_predictor(space)
        p1 = np.exp(log_sigmoid(eta))
        p0 = np.exp(log_sigmoid(-eta))
        tx = theta_x.probs
        return cls(np.column_stack([tx * p0, tx * p1]))

    @classmethod
    def from_retrospective(cls, retro: RetroParams, space: CovariateSpace) -> "JointTable":
        t0 = retro.theta_x_given_0.probs
        t1 = tilt_case_distribution(retro.theta_x_given_0, retro.beta, space).probs
        return cls(np.column_stack([(1 - retro.gamma) * t0, retro.gamma * t1]))


def logistic_prob(params: LogisticParams, x, y: int) -> float:
    """P(Y = y | X = x) under the logistic model, stable for large |eta|."""
    eta = params.alpha + float(np.dot(np.atleast_1d(np.asarray(x, dtype=float)), params.beta))
    if eta >= 0:
        z = np.exp(-eta)
        return 1.0 / (1.0 + z) if y == 1 else z / (1.0 + z)
    z = np.exp(eta)
    return z / (1.0 + z) if y == 1 else 1.0 / (1.0 + z)


def _check_sizes(theta: MarginalX, space: CovariateSpace):
    if len(theta) != space.size:
        raise ValueError(f"distribution has {len(theta)} entries, space has {space.size} points")


def marginal_gamma(theta_x: MarginalX, params: LogisticParams, space: CovariateSpace) -> float:
    """Case probability ``sum_x P(Y=1 | x) theta_X(x)``."""
    _check_sizes(theta_x, space)
    p1 = np.exp(log_sigmoid(params.linear_predictor(space)))
    return float(np.dot(p1, theta_x.probs))


def tilt_case_distribution(theta_x_given_0: MarginalX, beta, space: CovariateSpace) -> MarginalX:
    """Exponentially tilt the control distribution by ``exp(beta^T x)``."""
    _check_sizes(theta_x_given_0, space)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    t0 = theta_x_given_0.probs
    with np.errstate(divide="ignore"):
        logw = space.points @ beta + np.log(t0)
    w = np.exp(logw - logsumexp(logw))
    return MarginalX(w / w.sum())


def to_retrospective(theta_x: MarginalX, params: LogisticParams, space: CovariateSpace) -> RetroParams:
    _check_sizes(theta_x, space)
    eta = params.linear_predictor(space)
    gamma = marginal_gamma(theta_x, params, space)
    t0 = theta_x.probs * np.exp(log_sigmoid(-eta))
    t0 = t0 / t0.sum()
    return RetroParams(gamma, MarginalX(t0), params.beta.copy())


def to_prospective(retro: RetroParams, space: CovariateSpace) -> tuple[MarginalX, LogisticParams]:
    """Invert :func:`to_retrospective`.

    The intercept is ``logit(gamma) - log sum_x exp(beta^T x) theta_{X|0}(x)``.
    A control distribution with an empty cell is rejected: the model has full
    support on X, and the inverse would put an infinite log-ratio there.
    """
    t0 = retro.theta_x_given_0
    _check_sizes(t0, space)
    if np.any(t0.probs == 0):
        raise BoundaryError("theta_{X|Y=0} has a zero entry; the prospective inverse is on the boundary")
    g = retro.gamma
    log_z = logsumexp(space.points @ retro.beta + np.log(t0.probs))
    alpha = np.log(g) - np.log1p(-g) - log_z
    t1 = tilt_case_distribution(t0, retro.beta, space).probs
    tx = (1 - g) * t0.probs + g * t1
    return MarginalX(tx / tx.sum()), LogisticParams(alpha, retro.beta.copy())


def shift_case_probability(theta_x: MarginalX, params: LogisticParams, space: CovariateSpace,
                           new_gamma: float) -> tuple[MarginalX, LogisticParams]:
    """Move the case probability to ``new_gamma`` keeping ``theta_{X|Y}`` fixed.

    The intercept moves by the change in logit(gamma); ``theta_X`` is
    reweighted so that the conditional distributions of X given Y are
    unchanged.
    """
    g = marginal_gamma(theta_x, params, space)
    shift = (np.log(new_gamma) - np.log1p(-new_gamma)) - (np.log(g) - np.log1p(-g))
    new = LogisticParams(params.alpha + shift, params.beta)
    eta_old = params.linear_predictor(space)
    eta_new = new.linear_predictor(space)
    log_w = np.log1p(-new_gamma) + softplus(eta_new) - np.log1p(-g) - softplus(eta_old)
    tx = theta_x.probs * np.exp(log_w)
    return MarginalX(tx / tx.sum()), new


@dataclass(frozen=True)
class IdentifiabilityReport:
    identifiable: bool
    rank: int
    required: int


def check_identifiability(space: CovariateSpace) -> IdentifiabilityReport:
    """Is the ``(m, k+1)`` matrix of rows ``(1, x^T)`` of full column rank?"""
    d = space.design_matrix()
    rank = int(np.linalg.matrix_rank(d))
    return IdentifiabilityReport(space.k > 0 and rank == space.k + 1, rank, space.k + 1)


def reference_points(space: CovariateSpace) -> list[int]:
    """Greedy choice of k+1 points whose rows ``(1, x^T)`` are independent."""
    d = space.design_matrix()
    chosen: list[int] = []
    for i in range(space.size):
        trial = chosen + [i]
        if np.linalg.matrix_rank(d[trial]) == len(trial):
            chosen = trial
        if len(chosen) == space.k + 1:
            return chosen
    raise NotIdentifiable("no identifiable reference set exists in this covariate space")


__all__ = [
    "CovariateSpace", "LogisticParams", "MarginalX", "RetroParams", "JointTable",
    "IdentifiabilityReport", "logistic_prob", "marginal_gamma", "tilt_case_distribution",
    "to_retrospective", "to_prospective", "shift_case_probability", "check_identifiability",
    "reference_points", "softplus", "log_sigmoid",
]
