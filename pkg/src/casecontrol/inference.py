"""Posterior computation for beta under prospective and retrospective likelihoods.

Dense quadrature (scalar beta only) goes through two independent routes:

* prospective: for each beta, integrate the intercept out of
  ``prior(alpha, beta) * p(y | x, alpha, beta)``;
* retrospective: for each beta, integrate ``theta_{X|0}`` out of
  ``prior(theta_{X|0}, beta) * p(x | y, theta_{X|0}, beta)`` over the simplex.

For the conditioned prior both integrands are log-concave in the nuisance
coordinates (the intercept, or the softmax chart of the simplex), so each
beta node gets its own grid centred at the conditional mode and whitened by
the local curvature.  The trapezoid rule on such a grid converges
geometrically for these smooth, exponentially decaying integrands.

General joint laws (constructed counterexamples) are integrated on fixed
tensor grids over ``(alpha, chart(theta_X))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import expit, gammaln, log_softmax, logsumexp, softmax

from .errors import MassEscape
from .likelihoods import CountData, _xlogy_flagged, prospective_loglik
from .model import MarginalX, log_sigmoid, softplus, tilt_case_distribution
from .priors import ConditionedLogisticPrior, LogisticJointLaw, conditioned_prior_logdens_retro

Side = Literal["prospective", "retrospective"]

EQUIVALENCE_THRESHOLD = 1e-5
MASS_ESCAPE_FRACTION = 1e-6
# grid half-widths grow until the log-integrand at the edge is this far below the peak
EDGE_DROP = 40.0
DENSITY_FLOOR = 1e-12
MAX_CHART_STEP = 4.0


def _side(side: str) -> str:
    aliases = {"pro": "prospective", "prospective": "prospective",
               "retro": "retrospective", "retrospective": "retrospective"}
    try:
        return aliases[side]
    except KeyError:
        raise ValueError(f"side must be 'prospective' or 'retrospective', got {side!r}") from None


@dataclass(frozen=True)
class GridSpec:
    """Integration grid settings.

    ``beta_*`` fix the output grid.  ``nuisance_step`` and
    ``nuisance_halfwidth`` set the whitened grid for the conditioned prior
    (step and starting half-width in units of the local posterior sd);
    ``max_step`` caps the step in the natural coordinates.
    ``alpha_*`` and ``simplex_resolution``/``chart_bound`` set the fixed
    grids used for general joint laws.
    """

    beta_bounds: tuple[float, float] = (-15.0, 15.0)
    beta_nodes: int = 401
    alpha_bounds: tuple[float, float] = (-30.0, 30.0)
    alpha_nodes: int = 301
    simplex_resolution: int = 121
    chart_bound: float = 24.0
    nuisance_step: float = 0.4
    nuisance_halfwidth: float = 8.0
    max_halfwidth: float = 160.0
    max_step: float = 0.5
    auto_widen: bool = True

    def __post_init__(self):
        for name in ("beta_nodes", "alpha_nodes", "simplex_resolution"):
            if getattr(self, name) < 11:
                raise ValueError(f"{name} must be at least 11")
        for lo, hi in (self.beta_bounds, self.alpha_bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError("grid bounds must be finite with lo < hi")
        positive = (self.nuisance_step, self.nuisance_halfwidth, self.chart_bound, self.max_step)
        if not all(v > 0 for v in positive):
            raise ValueError("grid steps and widths must be positive")

    @property
    def beta_grid(self) -> np.ndarray:
        return np.linspace(self.beta_bounds[0], self.beta_bounds[1], self.beta_nodes)

    def widened(self) -> "GridSpec":
        lo, hi = self.beta_bounds
        mid, half = 0.5 * (lo + hi), hi - lo
        return replace(self, beta_bounds=(mid - half, mid + half), beta_nodes=2 * self.beta_nodes - 1)


@dataclass
class PosteriorGrid:
    """Normalized marginal density of scalar beta on a grid."""

    beta: np.ndarray
    density: np.ndarray
    log_evidence: float
    side: str
    log_marginal: np.ndarray = field(repr=False, default=None)

    def mean(self) -> float:
        return float(trapezoid(self.beta * self.density, self.beta))

    def sd(self) -> float:
        mu = self.mean()
        return float(np.sqrt(trapezoid((self.beta - mu) ** 2 * self.density, self.beta)))

    def integral(self) -> float:
        return float(trapezoid(self.density, self.beta))


# --------------------------------------------------------------------------
# whitened, mode-centred trapezoid integration for the conditioned prior


def _pro_log_integrand(alpha, beta, points, A):
    """``sum_x A_x1 eta - A_x+ softplus(eta)``; alpha (B, N), beta (B,)."""
    eta = alpha[..., None] + (beta[:, None] * points[:, 0][None, :])[:, None, :]
    return np.sum(A[:, 1] * eta - A.sum(axis=1) * softplus(eta), axis=-1)


def _pro_nuisance_conditioned(points: np.ndarray, A: np.ndarray, betas: np.ndarray,
                              grid: GridSpec) -> tuple[np.ndarray, float]:
    """log of ``int exp(sum_x A_x1 eta_x - A_x+ log(1 + e^eta_x)) d alpha`` per beta."""
    x = points[:, 0]
    Ax = A.sum(axis=1)
    A1 = A[:, 1].sum()
    bx = betas[:, None] * x[None, :]
    # bracketed Newton for the mode: score is decreasing in alpha
    lo = np.full(betas.size, -1.0)
    hi = np.full(betas.size, 1.0)

    def score(a):
        return A1 - np.sum(Ax * expit(a[:, None] + bx), axis=1)

    for _ in range(200):
        bad = score(lo) <= 0
        if not bad.any():
            break
        lo[bad] = 2 * lo[bad] - 1
    for _ in range(200):
        bad = score(hi) >= 0
        if not bad.any():
            break
        hi[bad] = 2 * hi[bad] + 1
    a = 0.5 * (lo + hi)
    for _ in range(200):
        s = score(a)
        lo = np.where(s > 0, a, lo)
        hi = np.where(s > 0, hi, a)
        pr = expit(a[:, None] + bx)
        info = np.sum(Ax * pr * (1 - pr), axis=1)
        nxt = a + s / info
        out = ~((nxt > lo) & (nxt < hi))
        nxt[out] = 0.5 * (lo[out] + hi[out])
        if np.max(np.abs(nxt - a)) < 1e-13 * (1 + np.max(np.abs(a))):
            a = nxt
            break
        a = nxt
    pr = expit(a[:, None] + bx)
    sd = 1.0 / np.sqrt(np.sum(Ax * pr * (1 - pr), axis=1))
    h = grid.nuisance_step
    # the integrand has poles a distance pi off the real axis, so the
    # trapezoid error depends on the absolute step as well as the relative one
    sd = np.minimum(sd, grid.max_step / h)

    half = grid.nuisance_halfwidth
    while True:
        z = np.arange(-half, half + 0.5 * h, h)
        alpha = a[:, None] + sd[:, None] * z[None, :]
        lf = _pro_log_integrand(alpha, betas, points, A)
        peak = np.max(lf, axis=1)
        edge = np.maximum(lf[:, 0], lf[:, -1]) - peak
        if np.all(edge < -EDGE_DROP) or half >= grid.max_halfwidth:
            break
        half *= 1.5
    log_w = np.log(h * sd)
    return logsumexp(lf, axis=1) + log_w, np.logaddexp(lf[:, 0], lf[:, -1]) + log_w


def _lse_last(v: np.ndarray) -> np.ndarray:
    top = v.max(axis=-1)
    return top + np.log(np.exp(v - top[..., None]).sum(axis=-1))


def _retro_chart_terms(u_free, betas, points, A):
    """Log-integrand in the softmax chart.

    ``u_free`` has shape (B, N, d); returns log-integrand (B, N).  With
    ``log t = u - lse(u)`` the integrand collapses to two log-sum-exps.
    """
    Ax = A.sum(axis=1)
    A1 = A[:, 1]
    xb = betas[:, None] * points[:, 0][None, :]
    d = u_free.shape[-1]
    lin = u_free @ Ax[:d]
    u = np.concatenate([u_free, np.zeros(u_free.shape[:-1] + (1,))], axis=-1)
    return (lin + (xb @ A1)[:, None] - (Ax.sum() - A1.sum()) * _lse_last(u)
            - A1.sum() * _lse_last(u + xb[:, None, :]))


def _retro_mode(betas, points, A, tol=1e-12, max_iter=100):
    """Conditional mode of the chart coordinates and the Hessian there, per beta."""
    m = points.shape[0]
    d = m - 1
    B = betas.size
    Ax = A.sum(axis=1)
    A0tot, A1tot = A[:, 0].sum(), A[:, 1].sum()
    xb = betas[:, None] * points[:, 0][None, :]
    u = np.tile(np.log(Ax[:d]) - np.log(Ax[d]), (B, 1))

    def value(uf):
        return _retro_chart_terms(uf[:, None, :], betas, points, A)[:, 0]

    def derivs(uf):
        full = np.concatenate([uf, np.zeros((B, 1))], axis=1)
        t0 = softmax(full, axis=1)
        t1 = softmax(full + xb, axis=1)
        g = Ax[:d] - A0tot * t0[:, :d] - A1tot * t1[:, :d]
        c0 = np.einsum("bi,ij->bij", t0[:, :d], np.eye(d)) - t0[:, :d, None] * t0[:, None, :d]
        c1 = np.einsum("bi,ij->bij", t1[:, :d], np.eye(d)) - t1[:, :d, None] * t1[:, None, :d]
        return g, -(A0tot * c0 + A1tot * c1)

    val = value(u)
    for _ in range(max_iter):
        g, H = derivs(u)
        if np.max(np.abs(g)) < tol * max(1.0, Ax.sum()):
            break
        # H is negative definite in the interior; a small ridge keeps saturated
        # iterates solvable and the step cap keeps them out of saturation
        ridge = 1e-10 * max(1.0, Ax.sum()) * np.eye(d)
        step = -np.linalg.solve(H - ridge, g[..., None])[..., 0]
        step *= np.minimum(1.0, MAX_CHART_STEP / np.maximum(np.max(np.abs(step), axis=1), 1e-300))[:, None]
        t = np.ones(B)
        for _ in range(40):
            cand = u + t[:, None] * step
            cv = value(cand)
            worse = cv < val - 1e-12 * np.abs(val)
            if not worse.any():
                break
            t[worse] *= 0.5
        moved = np.max(np.abs(cand - u))
        u, val = cand, cv
        if moved < 1e-14:
            break
    g, H = derivs(u)
    return u, H


def _tensor_nodes(d: int, half: float, h: float) -> np.ndarray:
    z1 = np.arange(-half, half + 0.5 * h, h)
    return np.array(list(itertools.product(z1, repeat=d))) if d > 1 else z1[:, None]


def _retro_nuisance_conditioned(points: np.ndarray, A: np.ndarray, betas: np.ndarray,
                                grid: GridSpec, chunk: int = 2_000_000) -> tuple[np.ndarray, float]:
    """log of ``int prod t^(A_x+ - 1) e^{A_x1 beta x} / (sum e^{beta x} t)^A_+1 dt`` per beta.

    The simplex integral runs in the softmax chart (Jacobian ``prod t``),
    whitened around the conditional mode.
    """
    m = points.shape[0]
    d = m - 1
    u_hat, H = _retro_mode(betas, points, A)
    cov = np.linalg.inv(-H)
    cov = 0.5 * (cov + np.swapaxes(cov, 1, 2))
    L = np.linalg.cholesky(cov)
    h = grid.nuisance_step
    widest = np.max(np.linalg.norm(L, axis=2), axis=1)
    L = L * np.minimum(1.0, grid.max_step / (h * widest))[:, None, None]
    logdet = np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)

    half = grid.nuisance_halfwidth
    log_int = np.empty(betas.size)
    log_edge = np.empty(betas.size)
    pending = np.arange(betas.size)
    while pending.size:
        z = _tensor_nodes(d, half, h)
        n_nodes = z.shape[0]
        on_edge = np.any(np.abs(np.abs(z) - np.abs(z).max()) < 1e-9, axis=1)
        per = max(1, chunk // (n_nodes * m))
        edge_gap = np.empty(pending.size)
        for s in range(0, pending.size, per):
            idx = pending[s:s + per]
            u = u_hat[idx, None, :] + np.einsum("bij,nj->bni", L[idx], z)
            lf = _retro_chart_terms(u, betas[idx], points, A)
            log_int[idx] = logsumexp(lf, axis=1)
            edge_gap[s:s + per] = np.max(lf[:, on_edge], axis=1) - np.max(lf, axis=1)
            log_edge[idx] = logsumexp(lf[:, on_edge], axis=1)
        if half >= grid.max_halfwidth:
            break
        # only the betas whose integrand is still large on the edge are redone
        pending = pending[edge_gap >= -EDGE_DROP]
        half *= 1.5
    log_w = logdet + d * np.log(h)
    return log_int + log_w, log_edge + log_w


# --------------------------------------------------------------------------
# fixed-grid routes for general joint laws


def _pro_nuisance_joint(law: LogisticJointLaw, data: CountData, betas: np.ndarray,
                        grid: GridSpec) -> tuple[np.ndarray, float]:
    alpha = np.linspace(*grid.alpha_bounds, grid.alpha_nodes)
    x = law.space.points[:, 0]
    n = data.counts
    A_, B_ = np.meshgrid(alpha, betas, indexing="xy")  # (B, N)
    eta = A_[..., None] + B_[..., None] * x
    loglik = np.sum(n[:, 1] * log_sigmoid(eta) + n[:, 0] * log_sigmoid(-eta), axis=-1)
    lf = law.log_ab(A_, B_[..., None]) + loglik
    w = np.full(alpha.size, alpha[1] - alpha[0])
    w[[0, -1]] *= 0.5
    return logsumexp(lf + np.log(w), axis=1), np.logaddexp(lf[:, 0], lf[:, -1]) + np.log(w[0])


def _retro_nuisance_joint(law: LogisticJointLaw, data: CountData, betas: np.ndarray,
                          grid: GridSpec, chunk: int = 4_000_000) -> tuple[np.ndarray, float]:
    """Integrate ``pi(alpha, beta) pi(theta_X | beta) p(x | y, ...)`` over alpha and theta_X."""
    pts = law.space.points
    x = pts[:, 0]
    m = pts.shape[0]
    d = m - 1
    n = data.counts
    alpha = np.linspace(*grid.alpha_bounds, grid.alpha_nodes)
    v1 = np.linspace(-grid.chart_bound, grid.chart_bound, grid.simplex_resolution)
    vs = np.array(list(itertools.product(v1, repeat=d)))
    vfull = np.concatenate([vs, np.zeros((vs.shape[0], 1))], axis=1)
    ltx = log_softmax(vfull, axis=1)                     # (V, m)
    chart_jac = np.sum(ltx, axis=1)                      # log prod theta_X
    ha = alpha[1] - alpha[0]
    hv = v1[1] - v1[0]
    wa = np.full(alpha.size, ha)
    wa[[0, -1]] *= 0.5
    wv1 = np.full(v1.size, hv)
    wv1[[0, -1]] *= 0.5
    wv = np.prod(np.array(list(itertools.product(wv1, repeat=d))), axis=1)
    a_edge = np.zeros(alpha.size, bool)
    a_edge[[0, -1]] = True
    v_edge = np.any(np.abs(np.abs(vs) - grid.chart_bound) < 1e-12, axis=1)
    edge = a_edge[:, None] | v_edge[None, :]
    logw = np.log(wa)[:, None] + np.log(wv)[None, :]     # (Na, V)

    out = np.empty(betas.size)
    log_edge = np.empty(betas.size)
    per = max(1, chunk // (alpha.size * vs.shape[0] * m))
    for s in range(0, betas.size, per):
        b = betas[s:s + per]                             # (B,)
        eta = alpha[None, :, None] + b[:, None, None] * x[None, None, :]   # (B, Na, m)
        lp1 = log_sigmoid(eta)
        lp0 = log_sigmoid(-eta)
        # gamma = sum_x theta_X p1 -> (B, Na, V)
        lgam = _lse_last(ltx[None, None, :, :] + lp1[:, :, None, :])
        l1mg = _lse_last(ltx[None, None, :, :] + lp0[:, :, None, :])
        lt0 = ltx[None, None] + lp0[:, :, None, :] - l1mg[..., None]
        lt1 = ltx[None, None] + lp1[:, :, None, :] - lgam[..., None]
        loglik = np.sum(n[:, 0] * lt0 + n[:, 1] * lt1, axis=-1)
        conc = np.broadcast_to(np.asarray(law.x_concentration(b[:, None]), dtype=float), (b.size, m))
        ldir = (np.einsum("bm,vm->bv", conc - 1.0, ltx) + gammaln(conc.sum(axis=1))[:, None]
                - np.sum(gammaln(conc), axis=1)[:, None])
        lab = law.log_ab(alpha[None, :], b[:, None, None] * np.ones((1, alpha.size, 1)))
        lf = lab[:, :, None] + ldir[:, None, :] + chart_jac[None, None, :] + loglik + logw[None]
        flat = lf.reshape(lf.shape[0], -1)
        tot = _lse_last(flat)
        out[s:s + per] = tot
        log_edge[s:s + per] = _lse_last(flat[:, edge.ravel()])
    return out, log_edge


# --------------------------------------------------------------------------
# public API


def log_posterior_pro(data: CountData, prior, params) -> float:
    """Unnormalized log posterior of ``(alpha, beta)`` under the prospective likelihood."""
    return float(prior.log_ab(params.alpha, params.beta)) + prospective_loglik(data, params)


def log_posterior_retro(data: CountData, prior: ConditionedLogisticPrior, retro_part) -> float:
    """Unnormalized log posterior of ``(theta_{X|0}, beta)`` under the retrospective likelihood."""
    theta0, beta = retro_part
    t0 = theta0 if isinstance(theta0, MarginalX) else MarginalX(theta0)
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    t1 = tilt_case_distribution(t0, beta, data.space)
    ll = _xlogy_flagged(data.counts[:, 0], t0.probs) + _xlogy_flagged(data.counts[:, 1], t1.probs)
    return conditioned_prior_logdens_retro((t0, beta), prior) + ll


def log_nuisance_integral(data: CountData, prior, side: Side, betas: np.ndarray,
                          grid: GridSpec = GridSpec()) -> tuple[np.ndarray, np.ndarray]:
    """log of the nuisance-integrated posterior kernel at each beta, without g.

    For a conditioned prior, prior pseudo-counts and data counts enter only
    through their sum.  Returns the values and the log of the part of each
    value contributed by the edge nodes of the nuisance grid.
    """
    side = _side(side)
    if data.space.k != 1:
        raise ValueError("dense quadrature is implemented for scalar beta only")
    betas = np.asarray(betas, dtype=float)
    if isinstance(prior, ConditionedLogisticPrior):
        A = prior.a.a + data.counts
        if side == "prospective":
            return _pro_nuisance_conditioned(data.space.points, A, betas, grid)
        return _retro_nuisance_conditioned(data.space.points, A, betas, grid)
    if isinstance(prior, LogisticJointLaw):
        if side == "prospective":
            return _pro_nuisance_joint(prior, data, betas, grid)
        return _retro_nuisance_joint(prior, data, betas, grid)
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def _log_g(prior, betas):
    if isinstance(prior, ConditionedLogisticPrior):
        return prior.g.log_g(betas[:, None])
    return np.zeros(betas.size)


def posterior_from_log_marginal(betas: np.ndarray, log_f: np.ndarray, side: str,
                                log_f_edge: Optional[np.ndarray] = None) -> PosteriorGrid:
    """Normalize a log marginal on a beta grid, checking for escaping mass.

    ``log_f_edge`` is the part of ``log_f`` carried by the edges of the
    nuisance grids; too much of it, or too much mass on the beta end nodes,
    raises :class:`MassEscape`.
    """
    finite = np.isfinite(log_f)
    if not finite.any():
        raise MassEscape("the posterior kernel vanishes on the whole grid")
    top = np.max(log_f[finite])
    f = np.where(finite, np.exp(log_f - top), 0.0)
    total = trapezoid(f, betas)
    if log_f_edge is not None:
        fe = np.exp(np.where(np.isfinite(log_f_edge), log_f_edge - top, -np.inf))
        edge_frac = trapezoid(fe, betas) / total
        if edge_frac > MASS_ESCAPE_FRACTION:
            raise MassEscape(f"{edge_frac:.3g} of the mass sits on the edge of the nuisance grid")
    h = betas[1] - betas[0]
    end_frac = 0.5 * h * (f[0] + f[-1]) / total
    if end_frac > MASS_ESCAPE_FRACTION:
        raise MassEscape(f"{end_frac:.3g} of the beta mass sits on the end nodes of the beta grid")
    return PosteriorGrid(betas, f / total, float(top + np.log(total)), side, log_f)


def marginal_beta_quadrature(data: CountData, prior, side: Side = "prospective",
                             grid: GridSpec = GridSpec()) -> PosteriorGrid:
    """Marginal posterior density of scalar beta by dense quadrature.

    On :class:`MassEscape` at the beta grid ends the bounds are doubled once
    (when ``grid.auto_widen``) before giving up.
    """
    side = _side(side)
    try:
        betas = grid.beta_grid
        log_i, log_edge = log_nuisance_integral(data, prior, side, betas, grid)
        lg = _log_g(prior, betas)
        return posterior_from_log_marginal(betas, lg + log_i, side, lg + log_edge)
    except MassEscape:
        if not grid.auto_widen:
            raise
    wide = replace(grid.widened(), auto_widen=False)
    wide = replace(wide, alpha_bounds=(2 * grid.alpha_bounds[0], 2 * grid.alpha_bounds[1]),
                   alpha_nodes=2 * grid.alpha_nodes - 1)
    return marginal_beta_quadrature(data, prior, side, wide)


def relative_discrepancy(reference: np.ndarray, other: np.ndarray, floor: float = DENSITY_FLOOR) -> float:
    """sup |other - reference| / reference where reference > floor * max(reference)."""
    mask = reference > floor * np.max(reference)
    return float(np.max(np.abs(other[mask] - reference[mask]) / reference[mask]))


@dataclass
class EquivalenceReport:
    max_relative_discrepancy: float
    evidence_gap: float
    verdict: str
    threshold: float
    prospective: PosteriorGrid
    retrospective: PosteriorGrid

    @property
    def equivalent(self) -> bool:
        return self.verdict == "EQUIVALENT"


def compare_posteriors(pro: PosteriorGrid, ret: PosteriorGrid, threshold: float = EQUIVALENCE_THRESHOLD
                       ) -> EquivalenceReport:
    if pro.beta.shape != ret.beta.shape or not np.allclose(pro.beta, ret.beta, rtol=0, atol=1e-12):
        raise ValueError("the two posteriors live on different beta grids")
    disc = relative_discrepancy(pro.density, ret.density)
    verdict = "EQUIVALENT" if disc < threshold else "DIFFERENT"
    return EquivalenceReport(disc, pro.log_evidence - ret.log_evidence, verdict, threshold, pro, ret)


def _common_grid(make, grid: GridSpec):
    """Run both sides on one beta grid, widening both together on escape."""
    try:
        return make(replace(grid, auto_widen=False))
    except MassEscape:
        if not grid.auto_widen:
            raise
    wide = replace(grid.widened(), auto_widen=False,
                   alpha_bounds=(2 * grid.alpha_bounds[0], 2 * grid.alpha_bounds[1]),
                   alpha_nodes=2 * grid.alpha_nodes - 1)
    return make(wide)


def equivalence_report(data: CountData, prior, grid: GridSpec = GridSpec(),
                       threshold: float = EQUIVALENCE_THRESHOLD) -> EquivalenceReport:
    """Compare prospective and retrospective marginal posteriors of beta."""
    def make(g):
        pro = marginal_beta_quadrature(data, prior, "prospective", g)
        ret = marginal_beta_quadrature(data, prior, "retrospective", g)
        return pro, ret

    pro, ret = _common_grid(make, grid)
    return compare_posteriors(pro, ret, threshold)


def log_bayes_factor(data: CountData, prior1, prior2, side: Side = "prospective",
                     grid: GridSpec = GridSpec()) -> float:
    """log of ``p(data | prior1) / p(data | prior2)`` on one side.

    Priors are unnormalized, so each evidence is divided by the prior's own
    normalizer, computed by the same quadrature with no data.
    """
    side = _side(side)
    empty = CountData.empty(data.space)

    def log_ev(prior, d):
        return marginal_beta_quadrature(d, prior, side, grid).log_evidence

    return (log_ev(prior1, data) - log_ev(prior1, empty)) - (log_ev(prior2, data) - log_ev(prior2, empty))


def bayes_factor(data: CountData, prior1, prior2, side: Side = "prospective",
                 grid: GridSpec = GridSpec()) -> float:
    return float(np.exp(log_bayes_factor(data, prior1, prior2, side, grid)))


__all__ = [
    "GridSpec", "PosteriorGrid", "EquivalenceReport", "EQUIVALENCE_THRESHOLD", "log_posterior_pro",
    "log_posterior_retro", "log_nuisance_integral", "marginal_beta_quadrature", "relative_discrepancy",
    "compare_posteriors", "equivalence_report", "log_bayes_factor", "bayes_factor",
    "posterior_from_log_marginal",
]
