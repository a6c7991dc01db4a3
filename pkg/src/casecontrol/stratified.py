"""Stratified and matched designs with a shared log odds ratio.

Every stratum s has its own intercept ``alpha_s`` (prospective side) or its
own control distribution ``theta_{X|0,s}`` (retrospective side); beta is
shared.  Given beta, both likelihoods and the stratified conditioned prior
factorize over strata, which is what makes per-stratum integration exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import AllDegenerate, MassEscape, NotIdentifiable, SeparationDetected
from .inference import (EQUIVALENCE_THRESHOLD, EquivalenceReport, GridSpec, compare_posteriors,
                        log_nuisance_integral, posterior_from_log_marginal)
from .likelihoods import SEPARATION_BOUND, CountData, _xlogy_flagged, prospective_loglik
from .mcmc import McmcConfig, McmcResult, _lse_rows, metropolis
from .model import CovariateSpace, LogisticParams, MarginalX, tilt_case_distribution
from .priors import (ConditionedLogisticPrior, GFunction, LogisticJointLaw, PseudoCounts, pro_kernel)


@dataclass(frozen=True)
class StratifiedData:
    """Per-stratum count tables on one covariate space.

    ``matching`` optionally records the intended (cases, controls) per stratum.
    """

    strata: tuple[CountData, ...]
    matching: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self):
        strata = tuple(self.strata)
        object.__setattr__(self, "strata", strata)
        if strata:
            space = strata[0].space
            for d in strata[1:]:
                if d.space != space:
                    raise ValueError("all strata must share one covariate space")
        for d in strata:
            if d.n == 0:
                raise ValueError("strata must be non-empty")
        if self.matching is not None:
            match = tuple((int(a), int(b)) for a, b in self.matching)
            if len(match) != len(strata):
                raise ValueError("one matching descriptor per stratum is required")
            object.__setattr__(self, "matching", match)

    @classmethod
    def from_records(cls, space: CovariateSpace, xs, ys, ss, weights=None) -> "StratifiedData":
        """Group records by stratum label in order of first appearance."""
        ys = np.asarray(ys)
        ss = list(ss)
        weights = np.ones(len(ys), dtype=np.int64) if weights is None else np.asarray(weights)
        xs = np.asarray(xs, dtype=float).reshape(len(ys), space.k)
        labels = list(dict.fromkeys(ss))
        strata = []
        for lab in labels:
            idx = [i for i, s in enumerate(ss) if s == lab]
            strata.append(CountData.from_records(space, xs[idx], ys[idx], weights[idx]))
        return cls(tuple(strata))

    @property
    def space(self) -> CovariateSpace:
        return self.strata[0].space

    @property
    def size(self) -> int:
        return len(self.strata)

    def pooled(self) -> CountData:
        return CountData(self.space, sum(d.counts for d in self.strata))


@dataclass(frozen=True)
class StratifiedParams:
    alphas: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class StratifiedPrior:
    """Stratified conditioned prior: pseudo-counts ``a_{xys}`` per stratum and one g for beta."""

    space: CovariateSpace
    a: np.ndarray
    g: GFunction = field(default_factory=GFunction.constant)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        if a.ndim != 3 or a.shape[1:] != (self.space.size, 2):
            raise ValueError(f"pseudo-counts must have shape (S, {self.space.size}, 2)")
        if np.any(a <= 0) or not np.all(np.isfinite(a)):
            raise ValueError("pseudo-counts must be positive and finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def size(self) -> int:
        return self.a.shape[0]

    def stratum_prior(self, s: int, with_g: bool = False) -> ConditionedLogisticPrior:
        g = self.g if with_g else GFunction.constant()
        return ConditionedLogisticPrior(self.space, PseudoCounts(self.a[s]), g)


@dataclass(frozen=True)
class StratifiedJointLaw:
    """``g(beta) prod_s pi_s(alpha_s | beta) Dirichlet(theta_{X|s}; c_s(beta))``.

    Each stratum law carries the conditional factor for ``(alpha_s, beta)``
    only; the beta factor ``log_g`` enters once.
    """

    space: CovariateSpace
    log_g: Callable
    strata: tuple[LogisticJointLaw, ...]
    name: str = "custom"


def stratified_gaussian_law(space: CovariateSpace, n_strata: int, alpha_sd: float = 1.0,
                            beta_sd: float = 1.0, x_concentration: float = 1.0) -> StratifiedJointLaw:
    """Independent gaussian intercepts and slope with flat Dirichlet covariate laws.

    Because each case probability mixes beta in through its intercept, this
    law couples beta to ``theta_{Y|S}`` and is not of the conditioned form.
    """
    m = space.size

    def log_a(alpha, beta):
        return stats.norm.logpdf(alpha, scale=alpha_sd) + np.zeros(np.shape(beta)[:-1])

    def conc(beta):
        beta = np.asarray(beta, dtype=float)
        return np.full(beta.shape[:-1] + (m,), float(x_concentration))

    def log_g(beta):
        return np.sum(stats.norm.logpdf(np.asarray(beta, dtype=float), scale=beta_sd), axis=-1)

    law = LogisticJointLaw(space, log_a, conc, name="stratum_gaussian")
    return StratifiedJointLaw(space, log_g, tuple(law for _ in range(n_strata)), name="stratified_gaussian")


# --------------------------------------------------------------------------
# likelihoods


def _check_strata(data: StratifiedData, count: int):
    if count != data.size:
        raise ValueError(f"expected {data.size} per-stratum parameters, got {count}")


def stratified_prospective_loglik(data: StratifiedData, params: StratifiedParams) -> float:
    _check_strata(data, params.alphas.size)
    return float(sum(prospective_loglik(d, LogisticParams(a, params.beta))
                     for d, a in zip(data.strata, params.alphas)))


def stratified_retrospective_loglik(data: StratifiedData, theta0_by_stratum: Sequence, beta) -> float:
    """Sum of per-stratum retrospective log-likelihoods; returns -inf at incompatible boundaries."""
    _check_strata(data, len(theta0_by_stratum))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    total = 0.0
    for d, t0 in zip(data.strata, theta0_by_stratum):
        t0 = t0 if isinstance(t0, MarginalX) else MarginalX(t0)
        t1 = tilt_case_distribution(t0, beta, d.space)
        total += _xlogy_flagged(d.counts[:, 0], t0.probs) + _xlogy_flagged(d.counts[:, 1], t1.probs)
    return float(total)


# --------------------------------------------------------------------------
# conditional likelihood


def _expand(d: CountData) -> tuple[np.ndarray, np.ndarray]:
    """Record-level covariates and labels of a stratum."""
    reps = d.counts.ravel()
    xs = np.repeat(np.repeat(d.space.points, 2, axis=0), reps, axis=0)
    ys = np.repeat(np.tile([0, 1], d.space.size), reps)
    return xs, ys


def _log_esp_moments(xs: np.ndarray, beta: np.ndarray, a: int):
    """log e_a of the weights ``exp(beta^T x_i)`` with the first two moments of
    ``sum_{i in T} x_i`` under ``P(T) proportional to prod_{i in T} w_i``, |T| = a.

    One pass over the records; each step mixes "item excluded" and "item
    included" in log space, so no weight is ever exponentiated unscaled.
    """
    k = xs.shape[1]
    logE = np.full(a + 1, -np.inf)
    logE[0] = 0.0
    mean = np.zeros((a + 1, k))
    second = np.zeros((a + 1, k, k))
    lw = xs @ beta
    for i in range(xs.shape[0]):
        x = xs[i]
        top = min(i + 1, a)
        new = np.logaddexp(logE[1: top + 1], logE[:top] + lw[i])
        p_out = np.exp(logE[1: top + 1] - new)
        p_in = np.exp(logE[:top] + lw[i] - new)
        m_prev = mean[:top]
        m_in = m_prev + x
        s_in = (second[:top] + m_prev[:, :, None] * x[None, None, :]
                + x[None, :, None] * m_prev[:, None, :] + np.outer(x, x)[None])
        mean[1: top + 1] = np.nan_to_num(p_out[:, None] * mean[1: top + 1]) + p_in[:, None] * m_in
        second[1: top + 1] = np.nan_to_num(p_out[:, None, None] * second[1: top + 1]) + p_in[:, None, None] * s_in
        logE[1: top + 1] = new
    return logE[a], mean[a], second[a]


def log_elementary_symmetric(log_w: np.ndarray, a: int) -> float:
    """log e_a(w) from log-weights by the prefix recursion."""
    logE = np.full(a + 1, -np.inf)
    logE[0] = 0.0
    for i, lw in enumerate(np.asarray(log_w, dtype=float)):
        top = min(i + 1, a)
        logE[1: top + 1] = np.logaddexp(logE[1: top + 1], logE[:top] + lw)
    return float(logE[a])


def degenerate_strata(data: StratifiedData) -> list[int]:
    """Indices of strata with no cases or no controls."""
    return [s for s, d in enumerate(data.strata) if np.any(d.col_totals == 0)]


def _conditional_terms(data: StratifiedData, beta: np.ndarray, derivs: bool):
    k = data.space.k
    ll, grad, hess = 0.0, np.zeros(k), np.zeros((k, k))
    for d in data.strata:
        n0, n1 = d.col_totals
        if n0 == 0 or n1 == 0:
            continue
        xs, ys = _expand(d)
        case_sum = xs[ys == 1].sum(axis=0)
        if derivs:
            le, mu, sec = _log_esp_moments(xs, beta, int(n1))
            grad += case_sum - mu
            hess -= sec - np.outer(mu, mu)
        else:
            le = log_elementary_symmetric(xs @ beta, int(n1))
        ll += float(case_sum @ beta) - le
    return ll, grad, hess


def conditional_loglik(data: StratifiedData, beta) -> float:
    """Conditional log-likelihood given per-stratum case totals.

    Degenerate strata (all cases or all controls) contribute zero; see
    :func:`degenerate_strata`.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return _conditional_terms(data, beta, derivs=False)[0]


def conditional_score_information(data: StratifiedData, beta) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and observed information of the conditional log-likelihood."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    ll, g, h = _conditional_terms(data, beta, derivs=True)
    return ll, g, -h


@dataclass
class ConditionalFit:
    beta: np.ndarray
    loglik: float
    information: np.ndarray
    covariance: np.ndarray
    iterations: int
    degenerate: list[int]

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


def fit_conditional_mle(data: StratifiedData, tol: float = 1e-10, max_iter: int = 200) -> ConditionalFit:
    """Newton ascent on the conditional log-likelihood (concave in beta)."""
    degenerate = degenerate_strata(data)
    if len(degenerate) == data.size:
        raise AllDegenerate("every stratum is all-case or all-control")
    k = data.space.k
    beta = np.zeros(k)
    ll, g, info = conditional_score_information(data, beta)
    if np.linalg.matrix_rank(info, tol=1e-10 * max(1.0, np.abs(info).max())) < k:
        raise NotIdentifiable("within-stratum covariate contrasts do not identify beta")
    observed = [d.space.points[d.row_totals > 0] for d in data.strata if d.row_totals.sum() > 0]
    contrasts = np.concatenate([pts - pts[0] for pts in observed])
    for it in range(1, max_iter + 1):
        try:
            step = np.linalg.solve(info, g)
        except np.linalg.LinAlgError:
            raise SeparationDetected("conditional information became singular") from None
        # a vanishing score alone is not enough: along a separating direction the
        # score decays like exp(-|beta|) while the Newton step stays near one
        if np.max(np.abs(g)) < tol and np.max(np.abs(step)) < 1e-6:
            break
        t = 1.0
        while True:
            cand = beta + t * step
            c_ll = conditional_loglik(data, cand)
            if c_ll >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t *= 0.5
        beta = cand
        if np.max(np.abs(contrasts @ beta)) > SEPARATION_BOUND:
            raise SeparationDetected("conditional MLE diverges; covariates separate cases from controls")
        ll, g, info = conditional_score_information(data, beta)
    else:
        raise SeparationDetected("Newton ascent did not settle; the conditional MLE may be infinite")
    cov = np.linalg.inv(info)
    return ConditionalFit(beta, ll, info, cov, it, degenerate)


# --------------------------------------------------------------------------
# stratified conditioned prior


def stratified_prior_logdens(params: StratifiedParams, prior: StratifiedPrior) -> float:
    """``log g(beta) + sum_{x,s} a_{x1s} eta_{xs} - a_{x+s} log(1 + e^eta_{xs})``, unnormalized."""
    if params.alphas.size != prior.size:
        raise ValueError("one intercept per stratum is required")
    pts = prior.space.points
    total = float(prior.g.log_g(params.beta))
    for s in range(prior.size):
        total += float(pro_kernel(params.alphas[s], params.beta, pts, prior.a[s]))
    return total


def augmented_space(space: CovariateSpace, n_strata: int) -> CovariateSpace:
    """Product space X x S with strata 2..S coded by indicator columns."""
    rows = []
    for s in range(n_strata):
        ind = np.zeros(n_strata - 1)
        if s > 0:
            ind[s - 1] = 1.0
        rows.extend(np.concatenate([p, ind]) for p in space.points)
    return CovariateSpace(np.array(rows))


def augment_to_unstratified(prior: StratifiedPrior) -> ConditionedLogisticPrior:
    """The stratified prior as a conditioned prior on the stratum-augmented space.

    g acts on the leading (original) beta coordinates and is flat in the
    stratum contrasts.
    """
    space = augmented_space(prior.space, prior.size)
    return ConditionedLogisticPrior(space, PseudoCounts(prior.a.reshape(-1, 2)), prior.g)


def augmented_params(params: StratifiedParams) -> LogisticParams:
    """Intercept of stratum 1 plus (beta, alpha_s - alpha_1 for s >= 2)."""
    a = params.alphas
    return LogisticParams(float(a[0]), np.concatenate([params.beta, a[1:] - a[0]]))


# --------------------------------------------------------------------------
# dual quadrature


def _stratum_log_integrals(data: StratifiedData, prior, side: str, betas: np.ndarray, grid: GridSpec):
    """Per-beta log of prod_s (nuisance integral of stratum s), with the edge share."""
    if isinstance(prior, StratifiedPrior):
        laws = [prior.stratum_prior(s) for s in range(prior.size)]
        log_g = prior.g.log_g(betas[:, None])
    elif isinstance(prior, StratifiedJointLaw):
        laws = list(prior.strata)
        log_g = prior.log_g(betas[:, None])
    else:
        raise TypeError(f"unsupported prior type {type(prior).__name__}")
    if len(laws) != data.size:
        raise ValueError("prior and data have different numbers of strata")
    total = np.array(log_g, dtype=float)
    edge_share = np.zeros(betas.size)
    for d, law in zip(data.strata, laws):
        li, le = log_nuisance_integral(d, law, side, betas, grid)
        total = total + li
        edge_share = edge_share + np.exp(np.where(np.isfinite(le), le - li, -np.inf))
    with np.errstate(divide="ignore"):
        return total, total + np.log(edge_share)


def stratified_marginal_beta(data: StratifiedData, prior, side: str = "prospective",
                             grid: GridSpec = GridSpec()):
    """Marginal posterior of scalar beta; nuisance integrals factorize over strata."""
    if data.space.k != 1:
        raise ValueError("dense quadrature is implemented for scalar beta only")
    betas = grid.beta_grid
    log_f, log_edge = _stratum_log_integrals(data, prior, side, betas, grid)
    return posterior_from_log_marginal(betas, log_f, side, log_edge)


def stratified_equivalence_report(data: StratifiedData, prior, grid: GridSpec = GridSpec(),
                                  threshold: float = EQUIVALENCE_THRESHOLD) -> EquivalenceReport:
    """Prospective vs retrospective marginal posteriors of beta for stratified data.

    Given beta the tensor-grid integrand over all stratum nuisances is a
    product of per-stratum factors, so the tensor trapezoid sum equals the
    product of per-stratum sums.
    """
    def make(g):
        return (stratified_marginal_beta(data, prior, "prospective", g),
                stratified_marginal_beta(data, prior, "retrospective", g))

    try:
        pro, ret = make(grid)
    except MassEscape:
        if not grid.auto_widen:
            raise
        pro, ret = make(grid.widened())
    return compare_posteriors(pro, ret, threshold)


# --------------------------------------------------------------------------
# sampling


def stratified_mcmc_sample(data: StratifiedData, prior: StratifiedPrior, side: str = "prospective",
                           config: McmcConfig = McmcConfig()) -> McmcResult:
    """Posterior draws for ``(alpha_s..., beta)`` or ``(u_s..., beta)`` (softmax charts)."""
    S, m, k = data.size, data.space.size, data.space.k
    pts = data.space.points
    A = prior.a + np.stack([d.counts for d in data.strata])
    beta_names = [f"beta{j + 1}" if k > 1 else "beta" for j in range(k)]
    if side in ("pro", "prospective"):
        names = [f"alpha{s + 1}" for s in range(S)] + beta_names

        def f(x):
            beta = x[:, S:]
            out = prior.g.log_g(beta)
            for s in range(S):
                out = out + pro_kernel(x[:, s], beta, pts, A[s])
            return out
    elif side in ("retro", "retrospective"):
        d = m - 1
        names = [f"u{s + 1}_{j + 1}" for s in range(S) for j in range(d)] + beta_names
        Ax = A.sum(axis=2)
        A1 = A[:, :, 1]

        def f(x):
            beta = x[:, S * d:]
            xb = beta @ pts.T
            out = prior.g.log_g(beta)
            for s in range(S):
                u = np.concatenate([x[:, s * d:(s + 1) * d], np.zeros((x.shape[0], 1))], axis=1)
                lt = u - _lse_rows(u)[:, None]
                out = out + lt @ Ax[s] + xb @ A1[s] - A1[s].sum() * _lse_rows(lt + xb)
            return out
    else:
        raise ValueError(f"unknown side {side!r}")
    return metropolis(f, len(names), config, names)


__all__ = [
    "StratifiedData", "StratifiedParams", "StratifiedPrior", "StratifiedJointLaw", "stratified_gaussian_law",
    "stratified_prospective_loglik", "stratified_retrospective_loglik", "log_elementary_symmetric",
    "degenerate_strata", "conditional_loglik", "conditional_score_information", "ConditionalFit",
    "fit_conditional_mle", "stratified_prior_logdens", "augmented_space", "augment_to_unstratified",
    "augmented_params", "stratified_marginal_beta", "stratified_equivalence_report", "stratified_mcmc_sample",
]
