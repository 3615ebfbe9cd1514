import math
import warnings

import numpy as np
import pytest
from scipy import integrate as sint
from scipy import special

from rieszlab import models as mdl
from rieszlab.errors import DomainError, ParameterError


def _omega_oracle(beta):
    # 2 int_0^1 (1 - t^b)^(+-1/2) dt via the Beta function
    return (2 / beta) * special.beta(1 / beta, 1.5), (2 / beta) * special.beta(1 / beta, 0.5)


# -- Neumann interval --------------------------------------------------------


def test_neumann_eigenpair_examples():
    mu, psi = mdl.neumann_eigenpair(1.0, 2, 0.0)
    np.testing.assert_allclose(mu, math.pi**2, rtol=1e-15)
    # cos(2 * pi * (0 + 1) / 2) = cos(pi)
    assert psi == -1.0
    mu, psi = mdl.neumann_eigenpair(1.0, 0, 0.37)
    assert mu == 0.0
    np.testing.assert_allclose(psi, 1 / math.sqrt(2), rtol=1e-15)
    mu, psi = mdl.neumann_eigenpair(2.0, 3, -2.0)
    np.testing.assert_allclose(mu, (3 * math.pi / 4) ** 2, rtol=1e-15)
    np.testing.assert_allclose(psi, 1 / math.sqrt(2), rtol=1e-15)


def test_neumann_orthonormal():
    x, w = np.polynomial.legendre.leggauss(200)
    G = mdl.eigenfunctions(mdl.neumann_model(1.5), 30, 1.5 * x) * np.sqrt(1.5 * w)
    np.testing.assert_allclose(G @ G.T, np.eye(30), atol=1e-12)


def test_neumann_domain_and_params():
    with pytest.raises(DomainError):
        mdl.neumann_eigenpair(1.0, 1, 1.5)
    with pytest.raises(ParameterError):
        mdl.neumann_eigenpair(0.0, 1, 0.0)
    with pytest.raises(ParameterError):
        mdl.neumann_eigenpair(1.0, -1, 0.0)


# -- Hermite functions -------------------------------------------------------


def test_hermite_examples():
    np.testing.assert_allclose(mdl.hermite_psi(0, 0.0), math.pi**-0.25, rtol=1e-15)
    assert mdl.hermite_psi(1, 0.0) == 0.0
    np.testing.assert_allclose(mdl.hermite_psi(2, 0.0), -(math.pi**-0.25) / math.sqrt(2), rtol=1e-15)


@pytest.mark.parametrize("k", [0, 1, 5, 17, 40])
def test_hermite_matches_scipy_polynomials(k):
    x = np.linspace(-6, 6, 101)
    norm = 1 / math.sqrt(2**k * math.factorial(k) * math.sqrt(math.pi))
    ref = norm * special.eval_hermite(k, x) * np.exp(-x * x / 2)
    np.testing.assert_allclose(mdl.hermite_psi(k, x), ref, atol=1e-12)


def test_hermite_high_index_orthonormal():
    t, w = np.polynomial.legendre.leggauss(2000)
    x, w = 32 * t, 32 * w
    T = mdl.hermite_table(300, x) * np.sqrt(w)
    np.testing.assert_allclose(T @ T.T, np.eye(300), atol=1e-10)


def test_hermite_far_tail_underflows_cleanly():
    v = mdl.hermite_psi(5, np.array([50.0, 1e3]))
    assert np.all(np.isfinite(v)) and np.all(np.abs(v) < 1e-300)


# -- single-well constants ---------------------------------------------------


def test_omega_constants_examples():
    om, omp = mdl.omega_constants(2)
    np.testing.assert_allclose(om, math.pi / 2, atol=1e-10)
    np.testing.assert_allclose(omp, math.pi, atol=1e-8)
    om, omp = mdl.omega_constants(1)
    np.testing.assert_allclose(om, 4 / 3, atol=1e-10)
    np.testing.assert_allclose(omp, 4.0, atol=1e-10)
    assert mdl.omega_constants(math.inf) == (2.0, 2.0)


@pytest.mark.parametrize("beta", [1.5, 3.0, 4.0, 7.5, 40.0])
def test_omega_constants_match_beta_function(beta):
    np.testing.assert_allclose(mdl.omega_constants(beta), _omega_oracle(beta), rtol=1e-11)


def test_omega_prime_is_scaled_omega():
    # integration by parts gives Omega' = 2 Omega / gamma for |x|^beta
    for beta in (1.2, 2.0, 3.0, 6.0):
        om, omp = mdl.omega_constants(beta)
        np.testing.assert_allclose(omp, 2 * om / (2 * beta / (beta + 2)), rtol=1e-11)


def test_omega_rejects_nonpositive_beta():
    with pytest.raises(ParameterError):
        mdl.omega_constants(0.0)


def test_turning_point_examples():
    assert mdl.turning_point(mdl.PowerWell(2), 4.0) == (2.0, 4.0)
    x, a = mdl.turning_point(mdl.PowerWell(4), 16.0)
    np.testing.assert_allclose((x, a), (2.0, 32.0), rtol=1e-15)
    x, _ = mdl.turning_point(mdl.PowerWell(2), 1e-12)
    assert x < 1e-5


def test_turning_point_general_well_by_bisection():
    Q = mdl.WellPotential(lambda x: x**2 + x**4)
    x, a = mdl.turning_point(Q, 2.0)
    np.testing.assert_allclose(x, 1.0, rtol=1e-11)
    np.testing.assert_allclose(a, 6.0, rtol=1e-6)
    with pytest.raises(ParameterError):
        mdl.turning_point(Q, 0.0)


def test_phase_zeta_closed_forms():
    Q = mdl.PowerWell(2)
    np.testing.assert_allclose(mdl.phase_zeta(Q, 1.0, 0.0), math.pi / 4, rtol=1e-11)
    assert mdl.phase_zeta(Q, 1.0, 1.0) == 0.0
    np.testing.assert_allclose(mdl.phase_zeta(Q, 1.0, 2.0), math.sqrt(3) - 0.5 * math.log(2 + math.sqrt(3)), rtol=1e-11)
    with pytest.raises(DomainError):
        mdl.phase_zeta(Q, 1.0, -0.5)


def test_phase_zeta_matches_scipy_quad():
    Q = mdl.PowerWell(3)
    mu = 20.0
    x_mu = mu ** (1 / 3)
    xs = np.array([0.1, 1.0, 2.5, 3.0, 4.0])
    got = mdl.phase_zeta(Q, mu, xs)
    for x, g in zip(xs, got):
        if x < x_mu:
            ref = sint.quad(lambda s: math.sqrt(mu - s**3), x, x_mu, epsabs=1e-13)[0]
        else:
            ref = sint.quad(lambda s: math.sqrt(s**3 - mu), x_mu, x, epsabs=1e-13)[0]
        np.testing.assert_allclose(g, ref, rtol=1e-9)


def test_bs_eigenvalue_examples():
    np.testing.assert_allclose(mdl.bs_eigenvalue(2.0, 5), 11.0, rtol=1e-10)
    np.testing.assert_allclose(mdl.bs_eigenvalue(2.0, 0), 1.0, rtol=1e-10)
    om4, _ = _omega_oracle(4.0)
    np.testing.assert_allclose(mdl.bs_eigenvalue(4.0, 10), (10.5 * math.pi / om4) ** (4 / 3), rtol=1e-10)
    np.testing.assert_allclose(mdl.bs_eigenvalue_quad(mdl.PowerWell(4), 10), mdl.bs_eigenvalue(4.0, 10), rtol=1e-9)


def test_bs_quadrature_on_general_well():
    # Q = x^2 + x^4 has no closed form; check the quantisation condition with scipy
    Q = mdl.WellPotential(lambda x: x**2 + x**4)
    mu = mdl.bs_eigenvalue_quad(Q, 7)
    x_mu = math.sqrt((-1 + math.sqrt(1 + 4 * mu)) / 2)
    action = 2 * sint.quad(lambda x: math.sqrt(max(mu - x**2 - x**4, 0)), 0, x_mu, epsabs=1e-13)[0]
    np.testing.assert_allclose(action, 7.5 * math.pi, rtol=1e-9)


def test_bs_eigenvalue_parameter_errors():
    with pytest.raises(ParameterError):
        mdl.bs_eigenvalue(1.0, 3)
    with pytest.raises(ParameterError):
        mdl.bs_eigenvalue(2.0, -1)
    with pytest.raises(ParameterError):
        mdl.single_well_model(0.9)


def test_bs_remainder_beta2():
    k = np.arange(10, 501)
    err = np.array([mdl.bs_eigenvalue(2.0, int(j)) for j in k]) - (2 * k + 1)
    assert np.all(np.abs(err) <= 2 / (k + 1))


@pytest.mark.parametrize("beta", [2.0, 3.0, 4.0])
def test_eigenvalue_and_gap_ratios_at_500(beta):
    om, omp = mdl.omega_constants(beta)
    g = 2 * beta / (beta + 2)
    mu = mdl.eigenvalues(mdl.SingleWell(beta), 502)
    k = 500
    assert 0.99 <= mu[k] / (math.pi * k / om) ** g <= 1.01
    gap = (mu[k + 1] - mu[k]) / ((2 * math.pi / omp) * (math.pi * k / om) ** (g - 1))
    assert abs(gap - 1) <= 0.02


# -- WKB ---------------------------------------------------------------------


def _hermite_state(k):
    Q = mdl.PowerWell(2)
    return mdl.wkb_state(Q, 2.0 * k + 1, k), Q


def test_wkb_state_invariants():
    Q = mdl.PowerWell(4)
    scaled = []
    for mu in (50.0, 500.0, 5000.0):
        st = mdl.wkb_state(Q, mu)
        np.testing.assert_allclose(Q(st.x_mu), mu, rtol=1e-12)
        np.testing.assert_allclose(mdl.phase_zeta(Q, mu, st.x_mu - st.delta), 1.0, rtol=1e-9)
        np.testing.assert_allclose(mdl.phase_zeta(Q, mu, st.x_mu + st.delta1), 1.0, rtol=1e-9)
        scaled += [st.delta * st.a_mu ** (1 / 3), st.delta1 * st.a_mu ** (1 / 3)]
    assert 1.0 < min(scaled) and max(scaled) < 1.6


def test_wkb_low_index_warning():
    with pytest.warns(mdl.LowIndexWarning):
        st = mdl.wkb_state(mdl.PowerWell(2), 7.0, 3)
    assert st.low_index
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not mdl.wkb_state(mdl.PowerWell(2), 41.0, 20).low_index


def test_wkb_matches_hermite_k30():
    st, Q = _hermite_state(30)
    x = np.linspace(-10, 10, 4001)
    w, h = mdl.wkb_psi(st, Q, x), mdl.hermite_psi(30, x)
    assert np.linalg.norm(w - h) / np.linalg.norm(h) < 0.05


def test_wkb_error_decreases_with_k():
    errs = []
    for k in (20, 60):
        st, Q = _hermite_state(k)
        x = np.linspace(-16, 16, 8001)
        w, h = mdl.wkb_psi(st, Q, x), mdl.hermite_psi(k, x)
        errs.append(np.linalg.norm(w - h) / np.linalg.norm(h))
    assert errs[0] <= 0.05
    assert errs[1] < errs[0]


@pytest.mark.parametrize("k", [20, 21, 45])
def test_wkb_parity_and_normalisation(k):
    st, Q = _hermite_state(k)
    x = np.linspace(0.01, 14, 700)
    np.testing.assert_array_equal(mdl.wkb_psi(st, Q, -x), (-1) ** k * mdl.wkb_psi(st, Q, x))
    grid = np.linspace(-16, 16, 16001)
    norm = np.sum(mdl.wkb_psi(st, Q, grid) ** 2) * (grid[1] - grid[0])
    assert abs(norm - 1) <= 0.02


def test_wkb_envelope_bounds():
    Q = mdl.PowerWell(4)
    mu = 300.0
    st = mdl.wkb_state(Q, mu)
    x = np.linspace(0, st.x_mu - st.delta, 400)[:-1]
    zeta = mdl.phase_zeta(Q, mu, x)
    osc = zeta > 1
    u2 = mdl.wkb_u(st, Q, x[osc]) ** 2
    assert np.all(u2 <= math.pi / np.sqrt(mu - Q(x[osc])) * (2 + 1 / (2 * zeta[osc])))
    xf = np.linspace(st.x_mu + st.delta1, st.x_mu + 2.0, 200)[1:]
    zf = mdl.phase_zeta(Q, mu, xf)
    uf = np.abs(mdl.wkb_u(st, Q, xf))
    assert np.all(uf <= 1.35 * (Q(xf) - mu) ** -0.25 * np.exp(-zf))


def test_u_norm_examples():
    Q = mdl.PowerWell(2)
    quad, asym = mdl.u_norm_sq(mdl.wkb_state(Q, 61.0), Q)
    assert abs(quad / math.pi**2 - 1) < 0.03
    np.testing.assert_allclose(asym, math.pi**2, rtol=1e-10)
    Q4 = mdl.PowerWell(4)
    mus = np.geomspace(1e2, 1e4, 6)
    vals = [mdl.u_norm_sq(mdl.wkb_state(Q4, m), Q4) for m in mus]
    slope = np.polyfit(np.log(mus), np.log([v[0] for v in vals]), 1)[0]
    assert abs(slope + 0.25) <= 0.02
    np.testing.assert_allclose([v[0] / v[1] for v in vals], 1.0, rtol=1e-8)


def test_single_well_eigenfunction_table_matches_single():
    model = mdl.single_well_model(3.0)
    x = np.linspace(-3, 3, 31)
    T = mdl.eigenfunctions(model, 14, x)
    np.testing.assert_allclose(T[13], mdl.eigenfunction(model, 13, x), rtol=1e-13)


def test_envelope_window_contains_decay():
    lo, hi = mdl.envelope_window(mdl.harmonic_model(), 50)
    assert lo == -hi and hi > math.sqrt(99)
    assert np.all(np.abs(mdl.hermite_table(50, np.array([hi])) < 1e-12))


# -- gap assumption ----------------------------------------------------------


def test_fit_gap_examples():
    kappa, n0 = mdl.fit_gap_params(mdl.eigenvalues(mdl.NeumannInterval(1.0), 500), 2.0)
    assert kappa >= math.pi**2 / 4
    assert tuple(mdl.fit_gap_params(2 * np.arange(100) + 1.0, 1.0)) == (2.0, 1)
    om, omp = mdl.omega_constants(4)
    target = (2 * math.pi / omp) * (math.pi / om) ** (1 / 3)
    assert abs(mdl.single_well_model(4).gap_kappa / target - 1) < 0.1


def test_fit_gap_failure_flag():
    fit = mdl.fit_gap_params(-np.arange(10.0), 1.0)
    assert not fit.ok
    with pytest.raises(ParameterError):
        mdl.fit_gap_params([1.0, 2.0], 1.0)


@pytest.mark.parametrize("model", [mdl.neumann_model(1.0), mdl.harmonic_model(), mdl.single_well_model(4.0)])
def test_gap_and_sum_distance_bounds_hold(model):
    mu = mdl.eigenvalues(model, 400)
    kappa, gamma, n0 = model.gap_kappa, model.gap_gamma, model.gap_N0
    pos = np.arange(1, 400)
    ok = pos > n0
    assert np.all(np.diff(mu)[ok] >= kappa * pos[ok] ** (gamma - 1) * (1 - 1e-12))
    j, k = np.meshgrid(np.arange(n0 + 1, 401), np.arange(n0 + 1, 401), indexing="ij")
    upper = k > j
    bound = mdl.sum_dist_bound(kappa, gamma, k[upper], j[upper])
    assert np.all(mu[k[upper] - 1] - mu[j[upper] - 1] >= bound - 1e-9 * np.abs(bound))


def test_model_gamma_values():
    assert mdl.neumann_model(2.0).gap_gamma == 2.0
    np.testing.assert_allclose(mdl.single_well_model(3.0).gap_gamma, 1.2)
    assert mdl.harmonic_model().gap_gamma == 1.0


def test_sigma_examples():
    np.testing.assert_allclose(mdl.sigma(0, 2, 10), 0.1 * math.log(10 * math.e), rtol=1e-15)
    np.testing.assert_allclose(mdl.sigma(2, 1, 10), 0.1, rtol=1e-15)
    np.testing.assert_allclose(mdl.sigma(1, 1, 1), 1.0, rtol=1e-15)
    with pytest.raises(ParameterError):
        mdl.sigma(0.0, 1.0, 3)


def test_diagonal_model():
    model = mdl.diagonal_model(np.arange(1, 50.0) ** 2, 2.0)
    assert not model.has_eigenfunctions
    np.testing.assert_array_equal(mdl.eigenvalues(model, 5), [1, 4, 9, 16, 25])
    with pytest.raises(ParameterError):
        mdl.eigenvalues(model, 60)
    with pytest.raises(ParameterError):
        mdl.eigenfunction(model, 0, 0.0)
