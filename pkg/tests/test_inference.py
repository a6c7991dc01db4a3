import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from casecontrol import (ConditionedLogisticPrior, CountData, CovariateSpace, GFunction, GridSpec, LogisticParams,
                         MarginalX, MassEscape, PseudoCounts, bayes_factor, conditioned_prior_logdens_pro,
                         conditioned_prior_logdens_retro, equivalence_report, independent_gaussian_law,
                         log_posterior_pro, log_posterior_retro, marginal_beta_quadrature, tilted_x_law)
from casecontrol.inference import log_bayes_factor, relative_discrepancy


def prior_on(space, a, g=None):
    return ConditionedLogisticPrior(space, PseudoCounts(np.asarray(a, dtype=float)),
                                    g or GFunction.gaussian([0.0], [[100.0]]))


@pytest.fixture
def reference_prior(binary_space):
    return prior_on(binary_space, np.ones((2, 2)))


# --------------------------------------------------------------------------
# posterior kernels


def test_zero_data_posterior_is_prior(binary_space, reference_prior):
    empty = CountData.empty(binary_space)
    p = LogisticParams(0.3, [-1.1])
    assert log_posterior_pro(empty, reference_prior, p) == pytest.approx(
        conditioned_prior_logdens_pro(p, reference_prior), abs=1e-14)
    part = (MarginalX([0.3, 0.7]), [0.4])
    assert log_posterior_retro(empty, reference_prior, part) == pytest.approx(
        conditioned_prior_logdens_retro(part, reference_prior), abs=1e-14)


def test_data_act_as_pseudo_counts(three_point_space):
    a = np.array([[1.0, 2.0], [0.5, 1.5], [2.0, 1.0]])
    n = np.array([[4, 1], [2, 3], [0, 5]])
    data = CountData(three_point_space, n)
    prior, updated = prior_on(three_point_space, a), prior_on(three_point_space, a + n)
    rng = np.random.default_rng(0)
    pro = [log_posterior_pro(data, prior, LogisticParams(al, [b])) - conditioned_prior_logdens_pro(
        LogisticParams(al, [b]), updated) for al, b in rng.normal(size=(10, 2))]
    assert np.ptp(pro) < 1e-10
    ret = []
    for t, b in zip(rng.dirichlet(np.ones(3), 10), rng.normal(size=10)):
        ret.append(log_posterior_retro(data, prior, (MarginalX(t), [b]))
                   - conditioned_prior_logdens_retro((MarginalX(t), [b]), updated))
    assert np.ptp(ret) < 1e-10


def test_retro_beta_zero_slice_is_dirichlet_kernel(three_point_space):
    a = np.array([[1.0, 2.0], [0.5, 1.5], [2.0, 1.0]])
    n = np.array([[4, 1], [2, 3], [0, 5]])
    data, prior = CountData(three_point_space, n), prior_on(three_point_space, a)
    rng = np.random.default_rng(1)
    for t in rng.dirichlet(np.ones(3), 5):
        expected = np.sum((a.sum(axis=1) + n.sum(axis=1) - 1) * np.log(t)) + float(prior.g.log_g(np.zeros(1)))
        assert log_posterior_retro(data, prior, (MarginalX(t), [0.0])) == pytest.approx(expected, abs=1e-12)


def test_posterior_increases_with_case_counts(binary_space, reference_prior):
    p = LogisticParams(0.2, [0.5])
    base = log_posterior_pro(CountData(binary_space, np.array([[3, 1], [2, 2]])), reference_prior, p)
    # one control at x = 0 relabeled as a case, row totals fixed
    more = log_posterior_pro(CountData(binary_space, np.array([[2, 2], [2, 2]])), reference_prior, p)
    assert more - base == pytest.approx(0.2, abs=1e-12)


# --------------------------------------------------------------------------
# quadrature


def test_marginal_matches_adaptive_quadrature_oracle(reference_data, reference_prior):
    post = marginal_beta_quadrature(reference_data, reference_prior, "prospective")
    assert post.integral() == pytest.approx(1.0, abs=1e-8)

    def kernel(b):
        f = lambda al: np.exp(log_posterior_pro(reference_data, reference_prior, LogisticParams(al, [b])) + 12.0)
        return integrate.quad(f, -40, 40, epsabs=0, epsrel=1e-12, limit=200)[0]

    idx = np.arange(0, post.beta.size, 8)
    vals = np.array([kernel(b) for b in post.beta[idx]])
    norm = integrate.quad(kernel, -15, 15, epsabs=0, epsrel=1e-10, limit=200)[0]
    assert relative_discrepancy(vals / norm, post.density[idx]) < 1e-6


@pytest.mark.parametrize("side", ["prospective", "retrospective"])
def test_symmetric_problem_gives_symmetric_marginal(binary_space, side):
    data = CountData(binary_space, np.array([[4, 2], [4, 2]]))
    prior = prior_on(binary_space, np.array([[1.5, 0.5], [1.5, 0.5]]), GFunction.gaussian([0.0], [[4.0]]))
    post = marginal_beta_quadrature(data, prior, side)
    assert np.max(np.abs(post.density - post.density[::-1])) < 1e-8


def test_pro_and_retro_agree_on_reference_data(reference_data, reference_prior):
    pro = marginal_beta_quadrature(reference_data, reference_prior, "prospective")
    ret = marginal_beta_quadrature(reference_data, reference_prior, "retrospective")
    assert relative_discrepancy(pro.density, ret.density) < 1e-6
    assert pro.mean() == pytest.approx(ret.mean(), abs=1e-8)


@pytest.mark.parametrize("side", ["prospective", "retrospective"])
def test_halving_grid_spacing_is_stable(three_point_space, side):
    data = CountData(three_point_space, np.array([[5, 2], [3, 3], [1, 4]]))
    prior = prior_on(three_point_space, np.full((3, 2), 0.8))
    coarse = marginal_beta_quadrature(data, prior, side)
    fine = marginal_beta_quadrature(data, prior, side, GridSpec(beta_nodes=801, nuisance_step=0.2))
    assert np.max(np.abs(fine.density[::2] - coarse.density)) < 1e-7


def test_zero_data_marginals_equal_prior_marginal(binary_space):
    prior = prior_on(binary_space, np.array([[1.0, 2.0], [1.5, 0.5]]), GFunction.gaussian([0.5], [[4.0]]))
    rep = equivalence_report(CountData.empty(binary_space), prior)
    assert rep.max_relative_discrepancy < 1e-8
    # constant-g beta marginal of a 2x2 conditioned prior is the law of a log odds ratio
    # of two independent Beta(a_x1, a_x0) probabilities; multiply by g and renormalize
    def beta_marginal(b):
        f = lambda al: np.exp(conditioned_prior_logdens_pro(LogisticParams(al, [b]), prior))
        return integrate.quad(f, -60, 60, epsabs=0, epsrel=1e-12, limit=200)[0]

    post = rep.prospective
    idx = np.arange(0, post.beta.size, 10)
    norm = integrate.quad(beta_marginal, -15, 15, epsabs=0, epsrel=1e-10, limit=200)[0]
    oracle = np.array([beta_marginal(b) for b in post.beta[idx]]) / norm
    assert relative_discrepancy(oracle, post.density[idx]) < 1e-6


def test_mass_escape(reference_data, reference_prior):
    tight = GridSpec(beta_bounds=(-0.5, 0.5), beta_nodes=41, auto_widen=False)
    with pytest.raises(MassEscape):
        marginal_beta_quadrature(reference_data, reference_prior, "prospective", tight)
    with pytest.raises(MassEscape):
        marginal_beta_quadrature(reference_data, reference_prior, "retrospective", GridSpec(
            beta_bounds=(-0.5, 0.5), beta_nodes=41))
    # a single widening is enough here
    ok = marginal_beta_quadrature(reference_data, reference_prior, "prospective",
                                  GridSpec(beta_bounds=(-4.0, 4.0), beta_nodes=201))
    assert ok.beta[-1] == pytest.approx(8.0) and ok.beta.size == 401


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(beta_nodes=5)
    with pytest.raises(ValueError):
        GridSpec(beta_bounds=(1.0, -1.0))


# --------------------------------------------------------------------------
# equivalence reports


def test_reference_equivalence(reference_data, reference_prior):
    rep = equivalence_report(reference_data, reference_prior)
    assert rep.equivalent and rep.max_relative_discrepancy < 1e-5


@pytest.mark.parametrize("g", [GFunction.constant(), GFunction.tabulated([-12, -2, 0, 3, 12], [1e-6, 0.5, 1.0, 0.2, 1e-6])])
def test_equivalence_with_other_g(binary_space, g):
    data = CountData(binary_space, np.array([[7, 3], [2, 5]]))
    rep = equivalence_report(data, prior_on(binary_space, np.array([[1.0, 2.0], [0.7, 1.3]]), g))
    assert rep.equivalent


def test_equivalence_on_three_points(three_point_space):
    data = CountData(three_point_space, np.array([[5, 2], [3, 3], [1, 4]]))
    rep = equivalence_report(data, prior_on(three_point_space, np.array([[1.0, 0.5], [2.0, 1.0], [0.7, 1.2]])))
    assert rep.equivalent


@settings(max_examples=12)
@given(st.lists(st.integers(0, 12), min_size=4, max_size=4), st.lists(st.floats(0.3, 3.0), min_size=4, max_size=4),
       st.floats(-1.0, 1.0), st.floats(1.0, 16.0))
def test_equivalence_on_random_2x2_problems(counts, a, mean, var):
    space = CovariateSpace(np.array([[0.0], [1.0]]))
    prior = prior_on(space, np.reshape(a, (2, 2)), GFunction.gaussian([mean], [[var]]))
    rep = equivalence_report(CountData(space, np.reshape(counts, (2, 2))), prior)
    assert rep.max_relative_discrepancy < 1e-5


def test_violation_coupling_beta_to_case_margin(reference_data, binary_space):
    rep = equivalence_report(reference_data, independent_gaussian_law(binary_space))
    assert not rep.equivalent and rep.max_relative_discrepancy > 1e-3


def test_violation_coupling_beta_to_covariate_margin(reference_data, binary_space):
    law = tilted_x_law(prior_on(binary_space, np.ones((2, 2))), 1.0)
    rep = equivalence_report(reference_data, law)
    assert not rep.equivalent and rep.max_relative_discrepancy > 1e-3


# --------------------------------------------------------------------------
# Bayes factors


@pytest.fixture
def two_priors(binary_space):
    a = np.array([[1.0, 2.0], [1.5, 0.5]])
    return prior_on(binary_space, a, GFunction.gaussian([0.0], [[1.0]])), \
        prior_on(binary_space, a, GFunction.gaussian([1.0], [[9.0]]))


def test_bayes_factor_identities(reference_data, two_priors):
    p1, p2 = two_priors
    assert bayes_factor(reference_data, p1, p1) == pytest.approx(1.0, abs=1e-10)
    assert log_bayes_factor(reference_data, p1, p2) == -log_bayes_factor(reference_data, p2, p1)


def test_bayes_factor_same_on_both_sides(reference_data, two_priors):
    p1, p2 = two_priors
    pro = bayes_factor(reference_data, p1, p2, "prospective")
    ret = bayes_factor(reference_data, p1, p2, "retrospective")
    assert abs(pro / ret - 1) < 1e-5


def test_bayes_factor_matches_double_integral_oracle(reference_data, two_priors):
    def evidence(prior, data):
        f = lambda b, al: np.exp(log_posterior_pro(data, prior, LogisticParams(al, [b])))
        return integrate.dblquad(f, -40, 40, -20, 20, epsabs=0, epsrel=1e-10)[0]

    p1, p2 = two_priors
    empty = CountData.empty(reference_data.space)
    oracle = (evidence(p1, reference_data) / evidence(p1, empty)) / (evidence(p2, reference_data) / evidence(p2, empty))
    assert bayes_factor(reference_data, p1, p2) == pytest.approx(oracle, rel=1e-6)
