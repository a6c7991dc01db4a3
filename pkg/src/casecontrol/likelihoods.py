"""Prospective, retrospective and joint likelihoods, and their maximizers.

All likelihoods consume count tables ``n_{xy}`` over a finite covariate
space, so every evaluation is O(|X|).

The retrospective fits run in an unconstrained softmax chart for
``theta_{X|Y=0}`` anchored at the last supported point.  In that chart the
retrospective log-likelihood is jointly concave in ``(u, beta)``::

    l(u, beta) = sum_x n_{x+} u_x - n_{+0} LSE(u) - n_{+1} LSE(u + X beta)
                 + sum_x n_{x1} beta^T x

so plain Newton ascent with backtracking is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import expit, logsumexp, softmax

from .errors import (BoundaryError, EmptyArm, NonConvergence, NotIdentifiable,
                     SeparationDetected, SingularInformation)
from .model import (CovariateSpace, JointTable, LogisticParams, MarginalX, RetroParams,
                    check_identifiability, log_sigmoid, tilt_case_distribution)

# Fitted log odds (or log odds ratios between observed covariate values)
# beyond this during ascent mean the MLE is at infinity.  The coefficients
# themselves may be large for a finite MLE when the design is ill conditioned.
SEPARATION_BOUND = 30.0
# Newton steps below this count as converged (together with the score tolerance).
STEP_TOL = 1e-6


@dataclass(frozen=True)
class CountData:
    """Count table ``n_{xy}`` on a covariate space; column index is y."""

    space: CovariateSpace
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts)
        if c.shape != (self.space.size, 2):
            raise ValueError(f"counts must have shape ({self.space.size}, 2), got {c.shape}")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("counts must be finite and non-negative")
        if np.issubdtype(c.dtype, np.floating):
            if not np.all(c == np.round(c)):
                raise ValueError("counts must be integers")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @classmethod
    def empty(cls, space: CovariateSpace) -> "CountData":
        return cls(space, np.zeros((space.size, 2), dtype=np.int64))

    @classmethod
    def from_records(cls, space: CovariateSpace, xs, ys, weights=None) -> "CountData":
        xs = np.asarray(xs, dtype=float).reshape(len(ys), space.k)
        counts = np.zeros((space.size, 2), dtype=np.int64)
        weights = np.ones(len(ys), dtype=np.int64) if weights is None else weights
        for x, y, w in zip(xs, ys, weights):
            counts[space.index_of(x), int(y)] += int(w)
        return cls(space, counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


@dataclass(frozen=True)
class PenaltySpec:
    kind: Literal["none", "ridge", "lasso"] = "none"
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "lasso"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise ValueError("penalty weight must be finite and non-negative")

    def value(self, beta) -> float:
        beta = np.asarray(beta, dtype=float)
        if self.kind == "ridge":
            return -self.weight * float(beta @ beta)
        if self.kind == "lasso":
            return -self.weight * float(np.abs(beta).sum())
        return 0.0


@dataclass
class FitResult:
    params: LogisticParams
    converged: bool
    iterations: int
    loglik: float
    observed_information: np.ndarray
    covariance: np.ndarray
    score_norm: float = 0.0


@dataclass
class RetroFit:
    theta_x_given_0: MarginalX
    beta: np.ndarray
    loglik: float
    iterations: int
    grad_norm: float
    boundary_points: tuple[int, ...] = ()


# --------------------------------------------------------------------------
# likelihood evaluation


def prospective_loglik(data: CountData, params: LogisticParams) -> float:
    eta = params.linear_predictor(data.space)
    n = data.counts
    return float(n[:, 1] @ log_sigmoid(eta) + n[:, 0] @ log_sigmoid(-eta))


def _xlogy_flagged(n: np.ndarray, p: np.ndarray) -> float:
    """sum n * log p with 0 log 0 = 0 and -inf when a positive count meets p = 0."""
    if np.any((n > 0) & (p <= 0)):
        return -np.inf
    mask = n > 0
    return float(np.sum(n[mask] * np.log(p[mask])))


def retrospective_loglik(data: CountData, retro: RetroParams) -> float:
    """Log-likelihood of X given Y; ``gamma`` never enters."""
    t0 = retro.theta_x_given_0
    t1 = tilt_case_distribution(t0, retro.beta, data.space)
    return _xlogy_flagged(data.counts[:, 0], t0.probs) + _xlogy_flagged(data.counts[:, 1], t1.probs)


def joint_loglik(data: CountData, theta: JointTable) -> float:
    return _xlogy_flagged(data.counts.ravel(), theta.probs.ravel())


# --------------------------------------------------------------------------
# prospective maximization


def _require_identifiable(space: CovariateSpace):
    rep = check_identifiability(space)
    if not rep.identifiable:
        raise NotIdentifiable(f"design rank {rep.rank} < {rep.required}; beta is not identifiable")


def _newton_logistic(data: CountData, ridge: float, tol: float, max_iter: int):
    X = data.space.design_matrix()
    nx = data.row_totals.astype(float)
    y1 = data.counts[:, 1].astype(float)
    p = X.shape[1]
    pen = np.full(p, 2.0 * ridge)
    pen[0] = 0.0
    theta = np.zeros(p)
    observed = nx > 0

    def fitted_extent(t):
        return float(np.max(np.abs(X[observed] @ t))) if observed.any() else 0.0

    def objective(t):
        eta = X @ t
        return float(y1 @ log_sigmoid(eta) + (nx - y1) @ log_sigmoid(-eta)) - 0.5 * float(t @ (pen * t))

    value = objective(theta)
    it = 0
    score = np.zeros(p)
    converged = False
    for it in range(1, max_iter + 1):
        mu = nx * expit(X @ theta)
        score = X.T @ (y1 - mu) - pen * theta
        w = mu * (1.0 - expit(X @ theta))
        H = X.T @ (w[:, None] * X) + np.diag(pen)
        try:
            if np.linalg.cond(H) > 1e14:
                raise np.linalg.LinAlgError
            step = np.linalg.solve(H, score)
        except np.linalg.LinAlgError:
            step = None
        # along a separating direction the score decays like exp(-|beta|) while
        # the Newton step stays near one, so both must be small
        if step is not None and np.max(np.abs(score)) < tol and np.max(np.abs(step)) < STEP_TOL:
            converged = True
            it -= 1
            break
        if step is None:
            if fitted_extent(theta) > SEPARATION_BOUND / 2:
                raise SeparationDetected("fitted probabilities reach 0/1; the MLE is at infinity") from None
            raise SingularInformation("weighted design matrix is rank deficient") from None
        t = 1.0
        while True:
            cand = theta + t * step
            cv = objective(cand)
            if cv >= value - 1e-12 * abs(value) or t < 1e-10:
                break
            t *= 0.5
        small_step = np.max(np.abs(cand - theta)) < 1e-15 * (1.0 + np.max(np.abs(theta)))
        theta, value = cand, cv
        if fitted_extent(theta) > SEPARATION_BOUND:
            raise SeparationDetected(
                f"fitted log odds exceeded {SEPARATION_BOUND} with score norm {np.max(np.abs(score)):.3g}")
        if small_step:
            # machine-precision stall; accept if the score is at rounding level
            mu = nx * expit(X @ theta)
            score = X.T @ (y1 - mu) - pen * theta
            converged = np.max(np.abs(score)) < max(tol, 1e-13 * max(nx.sum(), 1.0))
            break
    else:
        mu = nx * expit(X @ theta)
        score = X.T @ (y1 - mu) - pen * theta
        converged = np.max(np.abs(score)) < tol
    return theta, converged, it, float(np.max(np.abs(score)))


def fit_logistic_irls(data: CountData, penalty: PenaltySpec = PenaltySpec(),
                      tol: float = 1e-10, max_iter: int = 100) -> FitResult:
    """Maximize the prospective log-likelihood by IRLS (Newton) on counts.

    Ridge penalties ``-lambda ||beta||^2`` are supported; lasso is not smooth
    and goes through :func:`fit_penalized_value`.
    """
    if penalty.kind == "lasso":
        raise ValueError("IRLS handles kind='none' or 'ridge'; use fit_penalized_value for lasso")
    _require_identifiable(data.space)
    ridge = penalty.weight if penalty.kind == "ridge" else 0.0
    theta, converged, it, snorm = _newton_logistic(data, ridge, tol, max_iter)
    params = LogisticParams(theta[0], theta[1:])
    X = data.space.design_matrix()
    pr = expit(X @ theta)
    w = data.row_totals * pr * (1 - pr)
    info = X.T @ (w[:, None] * X)
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise SingularInformation("observed information is singular at the optimum") from None
    return FitResult(params, bool(converged), it, prospective_loglik(data, params), info, cov, snorm)


def _profile_alpha(data: CountData, beta, tol: float = 1e-12) -> tuple[float, float]:
    """argmax and max over alpha of the prospective log-likelihood at fixed beta."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    b = data.space.points @ beta
    nx = data.row_totals.astype(float)
    n1 = float(data.counts[:, 1].sum())
    n0 = float(data.counts[:, 0].sum())
    if n1 == 0 or n0 == 0:
        side = "-inf" if n1 == 0 else "+inf"
        raise BoundaryError(f"profile over alpha is attained at alpha = {side} (one-sided data)")

    def score(a):
        return n1 - float(nx @ expit(a + b))

    lo, hi = -1.0, 1.0
    while score(lo) <= 0:
        lo = 2 * lo - 1
    while score(hi) >= 0:
        hi = 2 * hi + 1
    a = np.log(n1 / n0) - float(np.average(b, weights=nx))
    if not lo < a < hi:
        a = 0.5 * (lo + hi)
    for _ in range(200):
        s = score(a)
        if s > 0:
            lo = a
        else:
            hi = a
        pr = expit(a + b)
        info = float(nx @ (pr * (1 - pr)))
        nxt = a + s / info if info > 0 else 0.5 * (lo + hi)
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - a) < tol or hi - lo < tol:
            a = nxt
            break
        a = nxt
    eta = a + b
    value = float(data.counts[:, 1] @ log_sigmoid(eta) + data.counts[:, 0] @ log_sigmoid(-eta))
    return a, value


def profile_prospective(data: CountData, beta) -> float:
    """``max_alpha`` of the prospective log-likelihood at fixed beta."""
    return _profile_alpha(data, beta)[1]


# --------------------------------------------------------------------------
# retrospective maximization in the softmax chart


def _support(data: CountData) -> np.ndarray:
    return np.flatnonzero(data.row_totals > 0)


class _RetroObjective:
    """Retrospective log-likelihood on the supported points, chart coordinates.

    Free chart coordinates are ``u[:-1]``; the last supported point is the
    anchor with ``u = 0``.
    """

    def __init__(self, data: CountData):
        idx = _support(data)
        self.idx = idx
        self.points = data.space.points[idx]
        self.counts = data.counts[idx].astype(float)
        self.nxp = self.counts.sum(axis=1)
        self.n0, self.n1 = self.counts.sum(axis=0)
        self.m = idx.size
        self.k = data.space.k
        # features phi(x) = (e_x without the anchor, x)
        self.phi = np.column_stack([np.eye(self.m)[:, : self.m - 1], self.points])

    def full_u(self, u_free):
        return np.append(u_free, 0.0)

    def value(self, u_free, beta) -> float:
        u = self.full_u(u_free)
        xb = self.points @ beta
        return float(self.nxp @ u - self.n0 * logsumexp(u) - self.n1 * logsumexp(u + xb)
                     + self.counts[:, 1] @ xb)

    def derivatives(self, u_free, beta):
        """Gradient and Hessian in ``(u_free, beta)``."""
        u = self.full_u(u_free)
        xb = self.points @ beta
        t0 = softmax(u)
        t1 = softmax(u + xb)
        phi = self.phi
        mu0 = phi.T @ t0
        mu1 = phi.T @ t1
        d = self.m - 1
        grad = np.concatenate([self.nxp[:d], self.counts[:, 1] @ self.points]) \
            - self.n1 * mu1
        grad[:d] -= self.n0 * t0[:d]
        cov1 = phi.T @ (t1[:, None] * phi) - np.outer(mu1, mu1)
        cov0 = phi.T @ (t0[:, None] * phi) - np.outer(mu0, mu0)
        H = -self.n1 * cov1
        H[:d, :d] -= self.n0 * cov0[:d, :d]
        return grad, H

    def initial_u(self):
        return np.log(self.nxp[:-1]) - np.log(self.nxp[-1])


def _newton_ascent(f, derivs, x0, tol, max_iter, diverged=None):
    x = np.asarray(x0, dtype=float)
    value = f(x)
    for it in range(max_iter + 1):
        g, H = derivs(x)
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        try:
            step = -np.linalg.solve(H, g)
            newton = True
        except np.linalg.LinAlgError:
            step = g / max(1.0, np.max(np.abs(np.diag(H))))
            newton = False
        if gnorm < tol and (not g.size or (newton and np.max(np.abs(step)) < STEP_TOL)):
            return x, value, it, gnorm
        if it == max_iter:
            break
        if step @ g <= 0:
            step = g / max(1.0, np.max(np.abs(np.diag(H))))
        t = 1.0
        # once the predicted gain is at rounding level the value cannot rank steps
        near = abs(g @ step) < 1e-12 * (1.0 + abs(value))
        while True:
            cand = x + t * step
            cv = f(cand)
            if near or cv >= value or t < 1e-12:
                break
            t *= 0.5
        if not near and np.max(np.abs(cand - x)) < 1e-15 * (1 + np.max(np.abs(x))) and cv <= value:
            return x, value, it, gnorm
        x, value = cand, cv
        if diverged is not None and diverged(x):
            raise SeparationDetected("iterates diverge; the likelihood is monotone")
    raise NonConvergence(f"Newton ascent did not converge in {max_iter} iterations (|grad| = {gnorm:.3g})")


def _retro_profile_solve(obj: _RetroObjective, beta, tol: float, u0=None):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    d = obj.m - 1
    if d == 0:
        return np.zeros(0), obj.value(np.zeros(0), beta), 0, 0.0

    def f(u):
        return obj.value(u, beta)

    def derivs(u):
        g, H = obj.derivatives(u, beta)
        return g[:d], H[:d, :d]

    return _newton_ascent(f, derivs, obj.initial_u() if u0 is None else u0, tol, 200)


def _theta0_full(obj: _RetroObjective, u_free, size: int) -> MarginalX:
    t = np.zeros(size)
    t[obj.idx] = softmax(obj.full_u(u_free))
    return MarginalX(t / t.sum())


def profile_retrospective(data: CountData, beta, tol: float = 1e-10) -> float:
    """``max`` over ``theta_{X|0}`` of the retrospective log-likelihood at fixed beta.

    Points with no observations get zero control mass at the optimum.
    """
    if data.n == 0:
        return 0.0
    obj = _RetroObjective(data)
    return _retro_profile_solve(obj, beta, tol)[1]


def _check_arms(data: CountData):
    n0, n1 = data.col_totals
    if n0 == 0 or n1 == 0:
        raise EmptyArm("retrospective fitting needs both cases and controls")


def fit_retrospective_mle(data: CountData, tol: float = 1e-8, max_iter: int = 200) -> RetroFit:
    """Joint maximization over ``(theta_{X|0}, beta)`` of the retrospective likelihood."""
    _require_identifiable(data.space)
    _check_arms(data)
    obj = _RetroObjective(data)
    sub = CovariateSpace(obj.points)
    _require_identifiable(sub)
    d = obj.m - 1
    x0 = np.concatenate([obj.initial_u(), np.zeros(obj.k)])

    def f(z):
        return obj.value(z[:d], z[d:])

    def derivs(z):
        return obj.derivatives(z[:d], z[d:])

    contrasts = obj.points - obj.points[0]

    def diverged(z):
        return np.max(np.abs(contrasts @ z[d:])) > SEPARATION_BOUND

    # tighten beyond the requested tolerance; it costs one or two Newton steps
    z, value, it, gnorm = _newton_ascent(f, derivs, x0, min(tol, 1e-10), max_iter, diverged)
    if gnorm >= tol:
        raise NonConvergence(f"retrospective MLE gradient {gnorm:.3g} above tolerance")
    boundary = tuple(int(i) for i in np.flatnonzero(data.row_totals == 0))
    return RetroFit(_theta0_full(obj, z[:d], data.space.size), z[d:].copy(), value, it, gnorm, boundary)


# --------------------------------------------------------------------------
# penalized estimators


def _profile_grad_hess(data: CountData, beta, side: str, state: dict):
    """Value, gradient and Hessian in beta of the log-profile on one side."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if side == "prospective":
        a, value = _profile_alpha(data, beta)
        X = data.space.design_matrix()
        eta = X @ np.concatenate([[a], beta])
        pr = expit(eta)
        nx = data.row_totals
        g = X.T @ (data.counts[:, 1] - nx * pr)
        w = nx * pr * (1 - pr)
        H = -(X.T @ (w[:, None] * X))
    else:
        obj = state.setdefault("obj", _RetroObjective(data))
        u, value, _, _ = _retro_profile_solve(obj, beta, 1e-11, state.get("u"))
        state["u"] = u
        g, H = obj.derivatives(u, beta)
    d = H.shape[0] - beta.size
    gb = g[d:]
    if d:
        Huu, Hub, Hbb = H[:d, :d], H[:d, d:], H[d:, d:]
        Hs = Hbb - Hub.T @ np.linalg.solve(Huu, Hub)
    else:
        Hs = H
    return value, gb, Hs


def _curvature_bound(data: CountData) -> float:
    """Upper bound on the curvature of either log-profile in beta."""
    pts = data.space.points
    M = (pts.T * (data.row_totals / 4.0)) @ pts
    return float(np.max(np.linalg.eigvalsh(M)))


def fit_penalized_value(data: CountData, penalty: PenaltySpec,
                        side: Literal["prospective", "retrospective"] = "prospective",
                        tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """argmax over beta of ``profile loglik(beta) + penalty(beta)``.

    Only the value is returned.  The prospective and retrospective profiles
    differ by a constant, so both sides target the same maximizer; they are
    computed by separate routes.
    """
    if side not in ("prospective", "retrospective"):
        raise ValueError(f"unknown side {side!r}")
    _require_identifiable(data.space)
    _check_arms(data)
    k = data.space.k

    if penalty.kind == "none" or penalty.weight == 0.0:
        if side == "prospective":
            return fit_logistic_irls(data).params.beta.copy()
        return fit_retrospective_mle(data).beta

    if penalty.kind == "ridge":
        if side == "prospective":
            return fit_logistic_irls(data, penalty, tol=tol).params.beta.copy()
        lam = penalty.weight
        state: dict = {}

        def f(b):
            return _profile_grad_hess(data, b, side, state)[0] - lam * float(b @ b)

        def derivs(b):
            _, g, H = _profile_grad_hess(data, b, side, state)
            return g - 2 * lam * b, H - 2 * lam * np.eye(k)

        return _newton_ascent(f, derivs, np.zeros(k), tol, 200)[0]

    # lasso: accelerated proximal gradient with a fixed step 1 / L
    lam = penalty.weight
    L = _curvature_bound(data)
    step = 1.0 / L
    state = {}
    beta = np.zeros(k)
    z = beta.copy()
    t = 1.0
    prev_obj = -np.inf
    restarted = False
    for _ in range(max_iter):
        _, g, _ = _profile_grad_hess(data, z, side, state)
        cand = z + step * g
        new = np.sign(cand) * np.maximum(np.abs(cand) - step * lam, 0.0)
        obj_new = _profile_grad_hess(data, new, side, state)[0] - lam * np.abs(new).sum()
        if obj_new < prev_obj - 1e-13 * max(1.0, abs(prev_obj)) and not restarted:
            # momentum overshot: restart from the last accepted point
            t = 1.0
            z = beta.copy()
            restarted = True
            continue
        restarted = False
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = new + ((t - 1) / t_next) * (new - beta)
        delta = np.max(np.abs(new - beta))
        beta, t, prev_obj = new, t_next, obj_new
        if delta < tol:
            return beta
    raise NonConvergence("lasso proximal gradient hit the iteration cap")


__all__ = [
    "CountData", "PenaltySpec", "FitResult", "RetroFit", "SEPARATION_BOUND",
    "prospective_loglik", "retrospective_loglik", "joint_loglik", "fit_logistic_irls",
    "fit_retrospective_mle", "profile_prospective", "profile_retrospective",
    "fit_penalized_value",
]
