import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.integrate import trapezoid
from scipy.special import expit

from casecontrol import (BoundaryError, ConditionedLogisticPrior, CovariateSpace, GFunction, JointTable,
                         LogisticParams, MarginalX, NotIdentifiable, PseudoCounts, SaturatedHFormLaw,
                         conditioned_prior_logdens_pro, conditioned_prior_logdens_retro,
                         dirichlet_alphabeta_logdens, dirichlet_law, dirichlet_logdens, hform_logdens,
                         independent_gaussian_law, jacobian_logdet_pro, jacobian_logdet_retro, properness_probe,
                         pseudo_count_construction_logdens, shm_factorization_check, tilted_x_law,
                         to_prospective)
from casecontrol.model import RetroParams
from casecontrol.priors import SHM_THRESHOLD


def space_of(*pts):
    return CovariateSpace(np.array(pts, dtype=float).reshape(len(pts), -1))


def prior_on(space, a, g=None):
    return ConditionedLogisticPrior(space, PseudoCounts(np.asarray(a, dtype=float)), g or GFunction.constant())


# --------------------------------------------------------------------------
# saturated laws


def test_dirichlet_examples():
    t = JointTable(np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert dirichlet_logdens(t, PseudoCounts(np.ones((2, 2)))) == pytest.approx(np.log(6))
    u = JointTable(np.full((2, 2), 0.25))
    assert dirichlet_logdens(u, PseudoCounts(np.full((2, 2), 2.0))) == pytest.approx(np.log(5040 / 256))


def test_dirichlet_integrates_to_one():
    a = np.array([2.0, 1.5, 3.0, 2.5])

    def f(p3, p2, p1):
        rest = 1 - p1 - p2 - p3
        if rest <= 0:
            return 0.0
        return np.exp(dirichlet_logdens(np.array([p1, p2, p3, rest]), a))

    total, _ = integrate.tplquad(f, 0, 1, 0, lambda p1: 1 - p1, 0, lambda p1, p2: 1 - p1 - p2,
                                 epsabs=1e-7, epsrel=1e-7)
    assert total == pytest.approx(1.0, abs=1e-4)


def test_dirichlet_boundary_flags():
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    assert dirichlet_logdens(np.array([[0.0, 0.5], [0.25, 0.25]]), a) == -np.inf
    assert dirichlet_logdens(np.array([[0.0, 0.5], [0.25, 0.25]]), np.array([[0.5, 1.0], [1.0, 1.0]])) == np.inf


def test_dirichlet_alphabeta_plug_in():
    # exp(0) / ((1 + 1)^2 (1 + 1)^2)
    val = dirichlet_alphabeta_logdens(LogisticParams(0.0, [0.0]), PseudoCounts(np.ones((2, 2))))
    assert val == pytest.approx(np.log(1 / 16), abs=1e-15)


def test_dirichlet_alphabeta_relabeling_symmetry():
    a = np.array([[2.0, 1.5], [0.7, 3.0]])
    for al, b in [(0.3, -1.2), (-1.0, 2.0), (0.0, 0.4)]:
        lhs = dirichlet_alphabeta_logdens(LogisticParams(al, [b]), PseudoCounts(a))
        rhs = dirichlet_alphabeta_logdens(LogisticParams(al + b, [-b]), PseudoCounts(a[::-1]))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_dirichlet_alphabeta_matches_pushforward_of_samples():
    a = np.array([[2.0, 3.0], [1.5, 2.5]])
    rng = np.random.default_rng(5)
    theta = rng.dirichlet(a.ravel(), size=400_000)
    beta = np.log(theta[:, 3] * theta[:, 0] / (theta[:, 2] * theta[:, 1]))
    edges = np.linspace(-2.0, 3.0, 11)
    counts, _ = np.histogram(beta, edges)
    # beta marginal of the (alpha, beta) density by dense quadrature
    al = np.linspace(-25, 25, 4001)
    bs = np.linspace(-8, 10, 3601)
    dens = np.array([trapezoid(np.exp([dirichlet_alphabeta_logdens(LogisticParams(x, [b]), PseudoCounts(a))
                                       for x in al[::8]]), al[::8]) for b in bs[::4]])
    bs = bs[::4]
    dens /= trapezoid(dens, bs)
    probs = np.array([trapezoid(dens[(bs >= lo) & (bs <= hi)], bs[(bs >= lo) & (bs <= hi)])
                      for lo, hi in zip(edges[:-1], edges[1:])])
    expected = probs * beta.size
    assert np.all(np.abs(counts - expected) < 5 * np.sqrt(expected) + 0.002 * expected)


def test_hform_reduces_to_dirichlet():
    a = np.array([[2.0, 1.5], [0.7, 3.0], [1.2, 1.1]])
    law = SaturatedHFormLaw(a)
    rng = np.random.default_rng(1)
    diffs = [hform_logdens(t.reshape(3, 2), law) - dirichlet_logdens(t, a) for t in rng.dirichlet(np.ones(6), 8)]
    assert np.ptp(diffs) < 1e-12


def test_hform_with_identity_h_shifts_exponents():
    a = np.array([[2.0, 1.5], [1.7, 3.0]])
    law = SaturatedHFormLaw(a, log_h=lambda r: float(np.sum(np.log(r))))
    shifted = a + np.array([[1.0, -1.0], [-1.0, 1.0]])
    rng = np.random.default_rng(2)
    diffs = [hform_logdens(t.reshape(2, 2), law) - dirichlet_logdens(t, shifted) for t in rng.dirichlet(np.ones(4), 10)]
    assert np.ptp(diffs) < 1e-12


def test_hform_interior_only():
    with pytest.raises(BoundaryError):
        hform_logdens(np.array([[0.0, 0.5], [0.25, 0.25]]), SaturatedHFormLaw(np.ones((2, 2))))


# --------------------------------------------------------------------------
# strong hyper Markov factorization


GAUSS_LOG_H = staticmethod(lambda r: -float(np.sum(np.log(r) ** 2)))


@pytest.mark.parametrize("shape", [(2, 2), (3, 2)])
@pytest.mark.parametrize("direction", ["Y-margin", "X-margin"])
def test_shm_holds_for_dirichlet_and_hforms(shape, direction):
    a = np.linspace(0.8, 2.6, shape[0] * shape[1]).reshape(shape)
    laws = [dirichlet_law(a),
            SaturatedHFormLaw(a, log_h=lambda r: -float(np.sum(np.log(r) ** 2))),
            SaturatedHFormLaw(a, log_h=lambda r: float(np.sum(np.log1p(r))), reference=(1, 1))]
    for law in laws:
        assert shm_factorization_check(law, direction) < SHM_THRESHOLD


def test_shm_detects_injected_violation():
    a = np.array([[1.5, 2.0], [1.0, 2.5]])

    def logdens(theta):
        # exponent of theta_00 driven by the Y-margin
        return dirichlet_logdens(theta, a) + 3.0 * theta[:, 1].sum() * np.log(theta[0, 0])

    assert shm_factorization_check(logdens, "Y-margin", shape=(2, 2)) > 1e-3
    assert shm_factorization_check(logdens, "X-margin", shape=(2, 2)) > 1e-3


def test_shm_for_logistic_laws(three_point_space):
    cond = prior_on(three_point_space, [[1, 2], [0.5, 1], [2, 1.5]], GFunction.gaussian([0.0], [[4.0]]))
    for d in ("Y-margin", "X-margin"):
        assert shm_factorization_check(cond, d) < SHM_THRESHOLD
    assert shm_factorization_check(independent_gaussian_law(three_point_space), "Y-margin") > 1e-3
    assert shm_factorization_check(tilted_x_law(cond, 1.0), "X-margin") > 1e-3


# --------------------------------------------------------------------------
# conditioned logistic prior


def test_conditioned_prior_examples(binary_space, three_point_space):
    a = np.array([[2.0, 1.5], [0.7, 3.0]])
    prior = prior_on(binary_space, a)
    for al, b in [(0.0, 0.0), (0.4, -1.3), (-2.0, 1.0)]:
        p = LogisticParams(al, [b])
        assert conditioned_prior_logdens_pro(p, prior) == pytest.approx(
            dirichlet_alphabeta_logdens(p, PseudoCounts(a)), abs=1e-12)
    flat3 = prior_on(three_point_space, np.ones((3, 2)))
    assert conditioned_prior_logdens_pro(LogisticParams(0.0, [0.0]), flat3) == pytest.approx(-6 * np.log(2))


def test_conditioned_prior_is_stable_for_large_predictors(binary_space):
    prior = prior_on(binary_space, np.ones((2, 2)))
    val = conditioned_prior_logdens_pro(LogisticParams(800.0, [0.0]), prior)
    assert val == pytest.approx(-2 * 800.0, rel=1e-12)


def test_conditioned_retro_examples(binary_space, three_point_space):
    prior = prior_on(binary_space, np.ones((2, 2)))
    assert conditioned_prior_logdens_retro((MarginalX([0.5, 0.5]), [0.0]), prior) == pytest.approx(-2 * np.log(2))
    a = np.array([[1.0, 2.0], [0.5, 1.0], [2.0, 1.5]])
    p3 = prior_on(three_point_space, a)
    rng = np.random.default_rng(3)
    for t in rng.dirichlet(np.ones(3), 5):
        expected = np.sum((a.sum(axis=1) - 1) * np.log(t))
        assert conditioned_prior_logdens_retro((MarginalX(t), [0.0]), p3) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("pts", [(0.0, 1.0), (0.0, 1.0, 2.0), (-1.0, 0.5, 1.0, 3.0)])
def test_change_of_variables_between_parametrizations(pts):
    """pro density x Jacobian x Dirichlet(theta_X) = retro density x Beta(gamma), up to a constant."""
    space = space_of(*pts)
    m = space.size
    rng = np.random.default_rng(len(pts))
    a = rng.uniform(0.5, 3.0, size=(m, 2))
    prior = prior_on(space, a, GFunction.gaussian([0.3], [[2.0]]))
    diffs = []
    for _ in range(25):
        t0 = MarginalX(rng.dirichlet(np.ones(m)))
        beta = rng.normal()
        gamma = rng.uniform(0.1, 0.9)
        tx, params = to_prospective(RetroParams(gamma, t0, [beta]), space)
        lhs = (conditioned_prior_logdens_pro(params, prior) + jacobian_logdet_retro(params, tx, space)
               + stats.dirichlet.logpdf(tx.probs, a.sum(axis=1)))
        rhs = (conditioned_prior_logdens_retro((t0, [beta]), prior)
               + stats.beta.logpdf(gamma, a[:, 1].sum(), a[:, 0].sum()))
        diffs.append(lhs - rhs)
    assert np.ptp(diffs) < 1e-8


def test_jacobian_pro_examples(binary_space, three_point_space):
    assert jacobian_logdet_pro(LogisticParams(0.0, [0.0]), three_point_space) == pytest.approx(-6 * np.log(2))
    # (alpha, beta) -> (tau_0, tau_1) on the 2x2 table
    al, b, h = 0.3, -0.8, 1e-6

    def taus(x, y):
        return np.array([expit(x), expit(x + y)])

    J = np.column_stack([(taus(al + h, b) - taus(al - h, b)) / (2 * h), (taus(al, b + h) - taus(al, b - h)) / (2 * h)])
    assert jacobian_logdet_pro(LogisticParams(al, [b]), binary_space) == pytest.approx(
        np.log(abs(np.linalg.det(J))), abs=1e-8)
    two = jacobian_logdet_pro(LogisticParams(al, [b]), binary_space)
    parts = sum(jacobian_logdet_pro(LogisticParams(al, [b]), space_of(x)) for x in (0.0, 1.0))
    assert two == pytest.approx(parts, abs=1e-14)


def test_jacobian_retro_examples(binary_space, three_point_space):
    m = three_point_space.size
    val = jacobian_logdet_retro(LogisticParams(0.0, [0.0]), MarginalX.uniform(m), three_point_space)
    assert val == pytest.approx((m - 1) * np.log(0.5) + np.log(2) + m * np.log(2))

    # (theta_{X|0}(0), beta, gamma) -> (alpha, beta, theta_X(0)) on the 2x2 table
    def forward(v):
        tx, p = to_prospective(RetroParams(v[2], MarginalX([v[0], 1 - v[0]]), [v[1]]), binary_space)
        return np.array([p.alpha, p.beta[0], tx.probs[0]])

    v0 = np.array([0.35, 0.9, 0.3])
    h = 1e-6
    J = np.column_stack([(forward(v0 + h * e) - forward(v0 - h * e)) / (2 * h) for e in np.eye(3)])
    tx, p = to_prospective(RetroParams(v0[2], MarginalX([v0[0], 1 - v0[0]]), [v0[1]]), binary_space)
    assert jacobian_logdet_retro(p, tx, binary_space) == pytest.approx(np.log(abs(np.linalg.det(J))), abs=1e-7)
    with pytest.raises(BoundaryError):
        jacobian_logdet_retro(LogisticParams(50.0, [0.0]), MarginalX.uniform(2), binary_space)


def test_doubling_pseudo_counts_doubles_curvature(three_point_space):
    a = np.array([[1.0, 2.0], [1.5, 1.0], [2.0, 2.5]])
    curv = []
    for scale in (1.0, 2.0):
        prior = prior_on(three_point_space, scale * a)
        # mode of a concave function of (alpha, beta); curvature along beta at the mode
        grid = np.linspace(-3, 3, 601)
        A, B = np.meshgrid(grid, grid, indexing="ij")
        lf = prior.log_ab(A, B[..., None])
        i, j = np.unravel_index(np.argmax(lf), lf.shape)
        al, b, h = grid[i], grid[j], 1e-3
        f = lambda x, y: float(prior.log_ab(x, np.array([y])))
        curv.append(-(f(al, b + h) - 2 * f(al, b) + f(al, b - h)) / h ** 2)
    assert curv[1] / curv[0] == pytest.approx(2.0, rel=0.05)


# --------------------------------------------------------------------------
# pseudo-count construction


@pytest.mark.parametrize("pts", [(0.0, 1.0), (0.0, 1.0, 2.5), (-2.0, -1.0, 0.0, 1.0, 2.0)])
def test_pseudo_count_construction_matches_prior(pts):
    space = space_of(*pts)
    rng = np.random.default_rng(7)
    prior = prior_on(space, rng.uniform(0.5, 3.0, size=(space.size, 2)))
    diffs = [pseudo_count_construction_logdens(LogisticParams(al, [b]), prior)
             - conditioned_prior_logdens_pro(LogisticParams(al, [b]), prior)
             for al in np.linspace(-2, 2, 5) for b in np.linspace(-1.5, 1.5, 5)]
    assert np.ptp(diffs) < 1e-10


def test_pseudo_count_construction_without_extra_points_is_beta_product(binary_space):
    a = np.array([[2.0, 1.5], [1.5, 1.5]])
    prior = prior_on(binary_space, a)
    al, b = 0.4, -0.7
    tau = expit(np.array([al, al + b]))
    # Beta(a_x1, a_x0) on each tau times the Jacobian of (alpha, beta) -> tau
    expected = sum(stats.beta.logpdf(tau[i], a[i, 1], a[i, 0]) + np.log(tau[i] * (1 - tau[i])) for i in range(2))
    assert pseudo_count_construction_logdens(LogisticParams(al, [b]), prior) == pytest.approx(expected, abs=1e-12)


def test_pseudo_count_construction_accepts_fractional_counts(three_point_space):
    prior = prior_on(three_point_space, np.full((3, 2), 1.5))
    val = pseudo_count_construction_logdens(LogisticParams(0.1, [0.2]), prior)
    assert np.isfinite(val)


def test_pseudo_count_construction_rejects_bad_reference(three_point_space):
    prior = prior_on(three_point_space, np.ones((3, 2)))
    with pytest.raises(NotIdentifiable):
        pseudo_count_construction_logdens(LogisticParams(0.0, [0.0]), prior, reference=[0, 0])
    with pytest.raises(ValueError):
        pseudo_count_construction_logdens(LogisticParams(0.0, [0.0]),
                                          prior_on(three_point_space, np.ones((3, 2)), GFunction.gaussian([0], [[1]])))


# --------------------------------------------------------------------------
# g, validation, properness


def test_g_function_kinds():
    g = GFunction.gaussian([1.0], [[4.0]])
    assert float(g.log_g(np.array([1.0]))) == pytest.approx(stats.norm.logpdf(1.0, 1.0, 2.0))
    t = GFunction.tabulated([-1.0, 0.0, 2.0], [1.0, np.e, 1.0])
    assert float(t.log_g(np.array([0.5]))) == pytest.approx(0.75)
    assert float(t.log_g(np.array([2.5]))) == -np.inf
    assert float(GFunction.constant().log_g(np.array([3.0]))) == 0.0
    with pytest.raises(ValueError):
        GFunction.gaussian([0.0], [[-1.0]])
    with pytest.raises(ValueError):
        GFunction.tabulated([0.0, 0.0], [1.0, 1.0])


def test_prior_validation(binary_space):
    with pytest.raises(ValueError):
        PseudoCounts(np.array([[1.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(NotIdentifiable):
        prior_on(space_of(1.0), np.ones((1, 2)))


def test_properness_probe(binary_space):
    proper = properness_probe(prior_on(binary_space, np.ones((2, 2)), GFunction.gaussian([0.0], [[4.0]])))
    assert proper.proper and proper.warning is None
    # constant g on 2x2: the mass is B(a_01, a_00) B(a_11, a_10) = pi^2 for a = 1/2
    flat = properness_probe(prior_on(binary_space, np.full((2, 2), 0.5)), bounds=(30.0, 60.0), nodes=481)
    assert flat.warning is not None and flat.proper
    assert flat.masses[-1] == pytest.approx(np.pi ** 2, rel=1e-5)
    short = properness_probe(prior_on(binary_space, np.full((2, 2), 0.5)))
    assert not short.proper


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4), st.floats(0.2, 4))
def test_retro_density_finite_on_interior(al, b, a0, a1):
    space = CovariateSpace(np.array([[0.0], [1.0], [2.0]]))
    prior = prior_on(space, np.array([[a0, a1], [a1, a0], [1.0, 1.0]]))
    t = np.array([0.2, 0.5, 0.3])
    assert np.isfinite(conditioned_prior_logdens_retro((MarginalX(t), [b]), prior))
    assert np.isfinite(conditioned_prior_logdens_pro(LogisticParams(al, [b]), prior))
