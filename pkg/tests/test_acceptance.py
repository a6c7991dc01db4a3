"""Acceptance gate: ten criteria at their stated tolerances and time budgets.

Each test records one line in ``RESULTS``; ``conftest.py`` prints them at
the end of the run.  Running this file directly prints the same lines.
"""

import itertools
import time

import numpy as np
from scipy.special import logsumexp

from casecontrol import (ConditionedLogisticPrior, CountData, CovariateSpace, GFunction, LogisticParams, McmcConfig,
                         PseudoCounts, SaturatedHFormLaw, StratifiedData, StratifiedParams, StratifiedPrior,
                         augment_to_unstratified, conditional_loglik, conditioned_prior_logdens_pro, dirichlet_law,
                         dirichlet_logdens, equivalence_report, fit_conditional_mle, fit_logistic_irls,
                         fit_retrospective_mle, independent_gaussian_law, marginal_beta_quadrature, mcmc_sample,
                         profile_prospective, profile_retrospective, pseudo_count_construction_logdens,
                         shm_factorization_check, stratified_equivalence_report, stratified_marginal_beta,
                         stratified_mcmc_sample, stratified_prior_logdens)
from casecontrol.inference import log_bayes_factor
from casecontrol.stratified import augmented_params

RESULTS: dict[int, str] = {}


def record(number, title, passed, detail, elapsed, budget):
    ok = passed and elapsed < budget
    RESULTS[number] = (f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}: {detail} "
                       f"({elapsed:.1f} s, budget {budget:g} s)")
    return ok


# --------------------------------------------------------------------------
# instance suites (deterministic)


def likelihood_suite(count=50, seed=20):
    """Random datasets over |X| in {2, 3, 4} and k in {1, 2}, free of empty cells."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        m = (2, 3, 4)[i % 3]
        k = 1 if m == 2 else 1 + (i // 3) % 2
        pts = rng.normal(size=(m, k)) * 1.5
        counts = rng.poisson(rng.uniform(3, 15, size=(m, 2))) + 1
        out.append(CountData(CovariateSpace(pts), counts))
    return out


def equivalence_suite(count=20, seed=30):
    """(data, conditioned prior) pairs on |X| in {2, 3} with gaussian or tabulated g."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        m = 2 if i % 2 == 0 else 3
        space = CovariateSpace(np.sort(rng.normal(size=m) * 1.2)[:, None])
        counts = rng.poisson(rng.uniform(0.5, 8, size=(m, 2)))
        a = rng.uniform(0.3, 3.0, size=(m, 2))
        if i % 5 == 4:
            nodes = np.linspace(-14, 14, 15)
            g = GFunction.tabulated(nodes, np.exp(-0.5 * (nodes / 3) ** 2) * (1.2 + np.sin(nodes)))
        else:
            g = GFunction.gaussian([rng.normal()], [[rng.uniform(1, 25)]])
        out.append((CountData(space, counts), ConditionedLogisticPrior(space, PseudoCounts(a), g)))
    return out


def stratified_suite(count=3, seed=40):
    rng = np.random.default_rng(seed)
    space = CovariateSpace(np.array([[0.0], [1.0]]))
    out = []
    for _ in range(count):
        strata = tuple(CountData(space, rng.poisson(rng.uniform(1, 8, size=(2, 2))) + (np.arange(4).reshape(2, 2) == 0))
                       for _ in range(2))
        a = rng.uniform(0.4, 2.5, size=(2, 2, 2))
        prior = StratifiedPrior(space, a, GFunction.gaussian([0.0], [[rng.uniform(2, 16)]]))
        out.append((StratifiedData(strata), prior))
    return out


# --------------------------------------------------------------------------
# criteria


def test_criterion_01_mle_agreement():
    t0 = time.perf_counter()
    worst = 0.0
    for d in likelihood_suite():
        pro = fit_logistic_irls(d).params.beta
        ret = fit_retrospective_mle(d).beta
        worst = max(worst, float(np.max(np.abs(pro - ret))))
    space = CovariateSpace(np.array([[0.0], [1.0]]))
    rng = np.random.default_rng(21)
    sat = 0.0
    for _ in range(10):
        n = rng.integers(1, 40, size=(2, 2))
        d = CountData(space, n)
        closed = np.log(n[0, 0] * n[1, 1] / (n[0, 1] * n[1, 0]))
        sat = max(sat, abs(fit_logistic_irls(d).params.beta[0] - closed), abs(fit_retrospective_mle(d).beta[0] - closed))
    ok = record(1, "IRLS and retrospective MLE agree", worst < 1e-6 and sat < 1e-10,
                f"max |diff| {worst:.2e} (< 1e-6), saturated 2x2 vs closed form {sat:.2e} (< 1e-10)",
                time.perf_counter() - t0, 10)
    assert ok, RESULTS[1]


def test_criterion_02_profile_proportionality():
    t0 = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(22)
    for d in likelihood_suite():
        centre = fit_logistic_irls(d).params.beta
        if d.space.k == 1:
            grid = centre[0] + np.linspace(-2, 2, 21)[:, None]
        else:
            grid = centre + rng.normal(size=(21, 2))
        diffs = [profile_prospective(d, b) - profile_retrospective(d, b) for b in grid]
        worst = max(worst, float(np.ptp(diffs)))
    ok = record(2, "profile likelihoods differ by a constant", worst < 1e-6,
                f"max spread {worst:.2e} over 21-point grids (< 1e-6)", time.perf_counter() - t0, 30)
    assert ok, RESULTS[2]


def test_criterion_03_posterior_equivalence():
    t0 = time.perf_counter()
    discs = [equivalence_report(d, p).max_relative_discrepancy for d, p in equivalence_suite()]
    ok = record(3, "prospective and retrospective posteriors agree", max(discs) < 1e-5,
                f"max discrepancy {max(discs):.2e} over {len(discs)} pairs (< 1e-5)", time.perf_counter() - t0, 120)
    assert ok, RESULTS[3]


def test_criterion_04_violation_witness():
    t0 = time.perf_counter()
    space = CovariateSpace(np.array([[0.0], [1.0]]))
    rep = equivalence_report(CountData(space, np.array([[6, 2], [3, 4]])), independent_gaussian_law(space))
    ok = record(4, "independent gaussian prior breaks equivalence", rep.max_relative_discrepancy > 1e-3,
                f"discrepancy {rep.max_relative_discrepancy:.3g} (> 1e-3), verdict {rep.verdict}",
                time.perf_counter() - t0, 10)
    assert ok, RESULTS[4]


def test_criterion_05_bayes_factors():
    t0 = time.perf_counter()
    rng = np.random.default_rng(25)
    worst = 0.0
    for i in range(5):
        m = 2 if i < 3 else 3
        space = CovariateSpace(np.arange(m, dtype=float)[:, None])
        data = CountData(space, rng.poisson(5, size=(m, 2)))
        a = PseudoCounts(rng.uniform(0.5, 2.5, size=(m, 2)))
        p1 = ConditionedLogisticPrior(space, a, GFunction.gaussian([0.0], [[rng.uniform(1, 9)]]))
        p2 = ConditionedLogisticPrior(space, a, GFunction.gaussian([rng.normal()], [[rng.uniform(1, 9)]]))
        lp = log_bayes_factor(data, p1, p2, "prospective")
        lr = log_bayes_factor(data, p1, p2, "retrospective")
        worst = max(worst, abs(np.expm1(lp - lr)))
    ok = record(5, "Bayes factors agree across likelihoods", worst < 1e-5,
                f"max |BF_pro/BF_ret - 1| {worst:.2e} over 5 prior pairs (< 1e-5)", time.perf_counter() - t0, 60)
    assert ok, RESULTS[5]


def test_criterion_06_strong_hyper_markov():
    t0 = time.perf_counter()
    worst = 0.0
    for shape in [(2, 2), (3, 2)]:
        a = np.linspace(0.8, 2.6, shape[0] * shape[1]).reshape(shape)
        laws = [dirichlet_law(a),
                SaturatedHFormLaw(a, log_h=lambda r: -float(np.sum(np.log(r) ** 2))),
                SaturatedHFormLaw(a, log_h=lambda r: float(np.sum(np.log1p(r))), reference=(1, 1))]
        for law, d in itertools.product(laws, ("Y-margin", "X-margin")):
            worst = max(worst, shm_factorization_check(law, d))
    base = np.array([[1.5, 2.0], [1.0, 2.5]])
    bad = min(shm_factorization_check(
        lambda t: dirichlet_logdens(t, base) + 3.0 * t[:, 1].sum() * np.log(t[0, 0]), d, shape=(2, 2))
        for d in ("Y-margin", "X-margin"))
    ok = record(6, "strong hyper Markov factorization", worst < 1e-8 and bad > 1e-3,
                f"max statistic {worst:.2e} (< 1e-8), constructed violation {bad:.3g} (> 1e-3)",
                time.perf_counter() - t0, 10)
    assert ok, RESULTS[6]


def test_criterion_07_pseudo_count_construction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(27)
    worst = 0.0
    for m in (2, 3, 5):
        space = CovariateSpace(np.sort(rng.normal(size=m))[:, None])
        prior = ConditionedLogisticPrior(space, PseudoCounts(rng.uniform(0.5, 3.0, size=(m, 2))), GFunction.constant())
        diffs = [pseudo_count_construction_logdens(LogisticParams(al, [b]), prior)
                 - conditioned_prior_logdens_pro(LogisticParams(al, [b]), prior)
                 for al in np.linspace(-2, 2, 5) for b in np.linspace(-2, 2, 5)]
        worst = max(worst, float(np.ptp(diffs)))
    ok = record(7, "pseudo-count construction matches the prior", worst < 1e-10,
                f"max spread {worst:.2e} over 5x5 grids, |X| in (2, 3, 5) (< 1e-10)", time.perf_counter() - t0, 5)
    assert ok, RESULTS[7]


def test_criterion_08_stratified_equivalence():
    t0 = time.perf_counter()
    discs, ident = [], 0.0
    rng = np.random.default_rng(28)
    for data, prior in stratified_suite():
        discs.append(stratified_equivalence_report(data, prior).max_relative_discrepancy)
        aug = augment_to_unstratified(prior)
        for al1, al2, b in rng.normal(scale=2.0, size=(25, 3)):
            p = StratifiedParams([al1, al2], [b])
            ident = max(ident, abs(stratified_prior_logdens(p, prior)
                                   - conditioned_prior_logdens_pro(augmented_params(p), aug)))
    ok = record(8, "stratified posteriors agree", max(discs) < 1e-5 and ident < 1e-12,
                f"max discrepancy {max(discs):.2e} (< 1e-5), augmented-prior identity {ident:.2e} (< 1e-12)",
                time.perf_counter() - t0, 180)
    assert ok, RESULTS[8]


def test_criterion_09_conditional_likelihood():
    t0 = time.perf_counter()
    rng = np.random.default_rng(29)
    worst = 0.0
    pts = np.arange(5, dtype=float)[:, None]
    space = CovariateSpace(pts)
    for _ in range(200):
        size = int(rng.integers(2, 9))
        cases = int(rng.integers(1, size))
        xs = rng.integers(0, 5, size=size)
        counts = np.zeros((5, 2), dtype=int)
        for j, x in enumerate(xs):
            counts[x, 1 if j < cases else 0] += 1
        beta = rng.normal(scale=1.5)
        brute = beta * xs[:cases].sum() - logsumexp(
            [beta * xs[list(T)].sum() for T in itertools.combinations(range(size), cases)])
        got = conditional_loglik(StratifiedData((CountData(space, counts),)), [beta])
        worst = max(worst, abs(got - brute) / max(1.0, abs(brute)))
    binary = CovariateSpace(np.array([[0.0], [1.0]]))
    pairs = [(1, 0)] * 11 + [(0, 1)] * 4 + [(1, 1)] * 6 + [(0, 0)] * 9
    strata = []
    for xc, x0 in pairs:
        c = np.zeros((2, 2), dtype=int)
        c[xc, 1] += 1
        c[x0, 0] += 1
        strata.append(CountData(binary, c))
    fit = fit_conditional_mle(StratifiedData(tuple(strata)))
    gap = abs(fit.beta[0] - np.log(11 / 4))
    ok = record(9, "conditional likelihood", worst < 1e-12 and gap < 1e-8,
                f"recursion vs enumeration {worst:.2e} on 200 strata (< 1e-12), matched pairs {gap:.2e} (< 1e-8)",
                time.perf_counter() - t0, 10)
    assert ok, RESULTS[9]


def test_criterion_10_mcmc_validity():
    t0 = time.perf_counter()
    worst_z, worst_rhat, n = 0.0, 0.0, 0
    for i, (data, prior) in enumerate(equivalence_suite()):
        for side in ("prospective", "retrospective"):
            quad = marginal_beta_quadrature(data, prior, side)
            res = mcmc_sample(data, prior, side, McmcConfig(seed=100 + i))
            worst_z = max(worst_z, abs(res.mean("beta") - quad.mean()) / res.mcse("beta"))
            worst_rhat = max(worst_rhat, float(res.rhat.max()))
            n += 1
    for i, (data, prior) in enumerate(stratified_suite()):
        for side in ("prospective", "retrospective"):
            quad = stratified_marginal_beta(data, prior, side)
            res = stratified_mcmc_sample(data, prior, side, McmcConfig(seed=200 + i))
            worst_z = max(worst_z, abs(res.mean("beta") - quad.mean()) / res.mcse("beta"))
            worst_rhat = max(worst_rhat, float(res.rhat.max()))
            n += 1
    data, prior = equivalence_suite()[1]
    cfg = McmcConfig(iterations=3000, burn_in=500, seed=77)
    runs = [mcmc_sample(data, prior, "retrospective", cfg).draws.tobytes() for _ in range(2)]
    sdata, sprior = stratified_suite()[0]
    runs += [stratified_mcmc_sample(sdata, sprior, "prospective", cfg).draws.tobytes() for _ in range(2)]
    same = runs[0] == runs[1] and runs[2] == runs[3]
    ok = record(10, "MCMC agrees with quadrature", worst_z < 3 and worst_rhat < 1.01 and same,
                f"max |mean - quad| / MCSE {worst_z:.2f} (< 3) and max R-hat {worst_rhat:.4f} (< 1.01) "
                f"over {n} runs, reruns byte-identical: {same}", time.perf_counter() - t0, 300)
    assert ok, RESULTS[10]


if __name__ == "__main__":
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion")):
        try:
            fn()
        except AssertionError:
            pass
    for k in sorted(RESULTS):
        print(RESULTS[k])
