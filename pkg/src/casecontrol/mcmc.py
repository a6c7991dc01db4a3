"""Component-wise random-walk Metropolis with per-chain counter-based streams.

Chains advance in lockstep so the target is evaluated once per coordinate
update for all chains, but every chain draws from its own Philox stream
spawned from the master seed.  Results therefore do not depend on how
many chains run together.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AllRejected, NonConvergence
from .likelihoods import CountData
from .priors import ConditionedLogisticPrior, LogisticJointLaw, pro_kernel

RNG_ALGORITHM = "numpy.random.Philox (4x64, counter-based)"
RHAT_LIMIT = 1.01
MIN_ACCEPTANCE = 0.01


@dataclass(frozen=True)
class McmcConfig:
    chains: int = 4
    iterations: int = 10000
    burn_in: int = 1000
    pilot: int = 1000
    seed: int = 0
    scales: Optional[tuple[float, ...]] = None
    init_sd: float = 1.0

    def __post_init__(self):
        if self.chains < 2:
            raise ValueError("at least two chains are needed for R-hat")
        if self.iterations <= self.burn_in or self.burn_in < 0 or self.pilot < 0:
            raise ValueError("need iterations > burn_in >= 0 and pilot >= 0")
        if self.scales is not None and any(s <= 0 for s in self.scales):
            raise ValueError("proposal scales must be positive")


@dataclass
class McmcResult:
    """Post burn-in draws with shape (chains, draws, dim) and diagnostics."""

    draws: np.ndarray
    names: list[str]
    acceptance: np.ndarray
    rhat: np.ndarray
    ess: np.ndarray
    scales: np.ndarray
    config: McmcConfig
    rng_algorithm: str = RNG_ALGORITHM
    extra: dict = field(default_factory=dict)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def mean(self, name: str) -> float:
        return float(self.draws[..., self.index(name)].mean())

    def sd(self, name: str) -> float:
        return float(self.draws[..., self.index(name)].std(ddof=1))

    def mcse(self, name: str) -> float:
        j = self.index(name)
        return float(self.draws[..., j].std(ddof=1) / np.sqrt(self.ess[j]))

    def converged(self, limit: float = RHAT_LIMIT) -> bool:
        return bool(np.all(self.rhat < limit))

    def summary(self) -> dict:
        return {
            name: {"mean": self.mean(name), "sd": self.sd(name), "mcse": self.mcse(name),
                   "rhat": float(self.rhat[j]), "ess": float(self.ess[j]),
                   "acceptance": float(self.acceptance[j])}
            for j, name in enumerate(self.names)
        }


# --------------------------------------------------------------------------
# diagnostics


def split_rhat(x: np.ndarray) -> float:
    """Split-chain potential scale reduction for draws of shape (chains, n)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[1] // 2
    halves = np.concatenate([x[:, :n], x[:, -n:]], axis=0)
    means = halves.mean(axis=1)
    W = halves.var(axis=1, ddof=1).mean()
    B = n * means.var(ddof=1)
    if W == 0:
        return 1.0 if B == 0 else np.inf
    return float(np.sqrt(((n - 1) / n * W + B / n) / W))


def _autocov(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    size = 1 << (2 * n - 1).bit_length()
    xc = x - x.mean(axis=-1, keepdims=True)
    f = np.fft.rfft(xc, size, axis=-1)
    return np.fft.irfft(f * np.conj(f), size, axis=-1)[..., :n] / n


def effective_sample_size(x: np.ndarray) -> float:
    """Multi-chain ESS with Geyer's initial monotone positive sequence."""
    x = np.asarray(x, dtype=float)
    M, N = x.shape
    acov = _autocov(x)
    chain_var = acov[:, 0] * N / (N - 1)
    W = chain_var.mean()
    var_plus = W * (N - 1) / N + (x.mean(axis=1).var(ddof=1) if M > 1 else 0.0)
    if var_plus == 0:
        return float(M * N)
    rho = 1.0 - (W - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # pair sums Gamma_t = rho_2t + rho_2t+1, truncated at the first non-positive
    pairs = rho[: 2 * (N // 2)].reshape(-1, 2).sum(axis=1)
    stop = np.argmax(pairs <= 0) if np.any(pairs <= 0) else pairs.size
    pairs = np.minimum.accumulate(pairs[:stop])
    tau = -1.0 + 2.0 * pairs.sum()
    tau = max(tau, 1.0 / np.log10(M * N))
    return float(M * N / tau)


# --------------------------------------------------------------------------
# sampler


def _chain_streams(seed: int, chains: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(chains)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _run(log_target, x, lp, directions, n_iter, streams):
    """Advance all chains by n_iter sweeps; returns the trace and accept counts.

    Sweep j proposes a gaussian move along column j of ``directions``.
    """
    C, d = x.shape
    trace = np.empty((C, n_iter, d))
    accepted = np.zeros((C, d))
    z = np.stack([g.standard_normal((n_iter, d)) for g in streams])
    logu = np.log(np.stack([g.random((n_iter, d)) for g in streams]))
    for it in range(n_iter):
        for j in range(d):
            prop = x.copy()
            prop += z[:, it, j, None] * directions[:, j]
            lp_prop = log_target(prop)
            ok = logu[:, it, j] < lp_prop - lp
            x[ok] = prop[ok]
            lp[ok] = lp_prop[ok]
            accepted[ok, j] += 1
        trace[:, it] = x
    return trace, accepted / n_iter


def _pilot_directions(sample: np.ndarray, previous: np.ndarray) -> np.ndarray:
    sd = sample.std(axis=0)
    if np.any(sd <= 0):
        # a stuck pilot: shrink the previous proposal and try again
        return 0.1 * previous
    cov = np.atleast_2d(np.cov(sample, rowvar=False))
    try:
        return 2.4 * np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return np.diag(2.4 * sd)


def metropolis(log_target: Callable[[np.ndarray], np.ndarray], dim: int, config: McmcConfig = McmcConfig(),
               names: Optional[Sequence[str]] = None, init: Optional[np.ndarray] = None) -> McmcResult:
    """Sample ``exp(log_target)`` on R^dim.

    ``log_target`` maps an array (chains, dim) to (chains,).  Each sweep makes
    one gaussian Metropolis move per dimension.  With ``config.scales`` the
    moves are along the coordinate axes.  Otherwise they follow the columns of
    2.4 times the Cholesky factor of the pilot-run covariance, which keeps the
    acceptance rate workable along correlated ridges such as (alpha, beta).
    The proposal is frozen after the pilot, so the sampled chain is a plain
    Metropolis chain.
    """
    names = list(names) if names is not None else [f"x{j}" for j in range(dim)]
    streams = _chain_streams(config.seed, config.chains)
    if init is None:
        x = np.stack([config.init_sd * g.standard_normal(dim) for g in streams])
    else:
        x = np.array(np.broadcast_to(init, (config.chains, dim)), dtype=float)
    lp = log_target(x)
    if not np.all(np.isfinite(lp)):
        raise ValueError("log target is not finite at the initial points")

    if config.scales is not None:
        scales = np.asarray(config.scales, dtype=float)
        if scales.size != dim:
            raise ValueError("one proposal scale per coordinate is required")
        directions = np.diag(scales)
    else:
        directions = np.eye(dim)
        if config.pilot > 0:
            for _ in range(6):
                trace, acc = _run(log_target, x, lp, directions, config.pilot, streams)
                directions = _pilot_directions(trace[:, config.pilot // 2:].reshape(-1, dim), directions)
                if np.all(acc > 0.05):
                    break
        scales = np.sqrt(np.sum(directions ** 2, axis=1))

    if config.burn_in:
        _run(log_target, x, lp, directions, config.burn_in, streams)
    draws, acc = _run(log_target, x, lp, directions, config.iterations - config.burn_in, streams)
    rate = acc.mean(axis=0)
    if np.min(rate) < MIN_ACCEPTANCE:
        raise AllRejected(f"acceptance rate {np.min(rate):.3g} after burn-in")
    rhat = np.array([split_rhat(draws[..., j]) for j in range(dim)])
    ess = np.array([effective_sample_size(draws[..., j]) for j in range(dim)])
    return McmcResult(draws, names, rate, rhat, ess, scales, config)


def require_convergence(result: McmcResult, limit: float = RHAT_LIMIT) -> McmcResult:
    if not result.converged(limit):
        worst = result.names[int(np.argmax(result.rhat))]
        raise NonConvergence(f"R-hat {np.max(result.rhat):.4f} for {worst} exceeds {limit}")
    return result


# --------------------------------------------------------------------------
# targets


def _lse_rows(v: np.ndarray) -> np.ndarray:
    top = v.max(axis=1)
    return top + np.log(np.exp(v - top[:, None]).sum(axis=1))


def prospective_target(data: CountData, prior) -> tuple[Callable, int, list[str]]:
    """Posterior of ``(alpha, beta)`` under the prospective likelihood."""
    k = data.space.k
    names = ["alpha"] + [f"beta{j + 1}" if k > 1 else "beta" for j in range(k)]
    if isinstance(prior, ConditionedLogisticPrior):
        A = prior.a.a + data.counts
        pts = data.space.points

        def f(x):
            return prior.g.log_g(x[:, 1:]) + pro_kernel(x[:, 0], x[:, 1:], pts, A)
    elif isinstance(prior, LogisticJointLaw):
        # theta_X drops out of the prospective posterior of (alpha, beta)
        pts, n = data.space.points, data.counts

        def f(x):
            return (prior.log_ab(x[:, 0], x[:, 1:])
                    + pro_kernel(x[:, 0], x[:, 1:], pts, n.astype(float)))
    else:
        raise TypeError(f"unsupported prior type {type(prior).__name__}")
    return f, 1 + k, names


def retrospective_target(data: CountData, prior: ConditionedLogisticPrior) -> tuple[Callable, int, list[str]]:
    """Posterior of ``(theta_{X|0}, beta)`` in the softmax chart of the simplex.

    The chart Jacobian ``prod_x theta_x`` is included, which turns the
    ``(a_x+ - 1)`` exponents into ``a_x+``.
    """
    if not isinstance(prior, ConditionedLogisticPrior):
        raise TypeError("the retrospective sampler needs a conditioned prior")
    m, k = data.space.size, data.space.k
    A = prior.a.a + data.counts
    pts = data.space.points
    names = [f"u{j + 1}" for j in range(m - 1)] + [f"beta{j + 1}" if k > 1 else "beta" for j in range(k)]

    Ax = A.sum(axis=1)
    A1 = A[:, 1]
    A1tot = A1.sum()

    def f(x):
        u = np.concatenate([x[:, : m - 1], np.zeros((x.shape[0], 1))], axis=1)
        beta = x[:, m - 1:]
        xb = beta @ pts.T
        # the chart Jacobian cancels the -1 in the exponents
        lse_u = _lse_rows(u)
        lt = u - lse_u[:, None]
        return (prior.g.log_g(beta) + lt @ Ax + xb @ A1 - A1tot * _lse_rows(lt + xb))

    return f, m - 1 + k, names


def mcmc_sample(data: CountData, prior, side: str = "prospective", config: McmcConfig = McmcConfig()
                ) -> McmcResult:
    """Sample the posterior on either side; ``beta`` is always among the names."""
    if side in ("pro", "prospective"):
        f, d, names = prospective_target(data, prior)
    elif side in ("retro", "retrospective"):
        f, d, names = retrospective_target(data, prior)
    else:
        raise ValueError(f"unknown side {side!r}")
    return metropolis(f, d, config, names)


__all__ = [
    "McmcConfig", "McmcResult", "RNG_ALGORITHM", "split_rhat", "effective_sample_size", "metropolis",
    "require_convergence", "prospective_target", "retrospective_target", "mcmc_sample",
]
