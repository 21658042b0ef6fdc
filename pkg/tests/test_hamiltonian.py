import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from resmix.errors import BranchAmbiguity, DomainError, RegimeWarning, VanishingA0
from resmix.hamiltonian import (
    atomic_state,
    atomic_state_at,
    characteristic_coefficients,
    conversion_coefficient,
    entrance_eigenvalue,
    eigenvalue_along,
    exchange_at,
    exchange_polynomial,
    fluxes_at,
    hamiltonian_matrix,
    implicit_distance,
    mismatch_coefficients,
    oscillation_roots,
    phase_at,
    solve,
)
from resmix.model import BoundaryFields, MediumParams, rabi
from resmix.oracle import IntegratorConfig, integrate_canonical
from resmix.regimes import eit_depleted, maxcoh_zeta

# detuned, phase-matched draw with unequal inputs: periodic with 0 < p < 1
GENERAL = (MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta2=0.03), BoundaryFields(1.0, 0.8))


def _direct_exchange(params, co, boundary, J):
    g2 = 4 * params.mu1 * params.mu2 * params.mu3 * J * (boundary.eta10 - J) * (boundary.eta20 - J)
    G = co.A1 * J + co.A2 * J**2 + co.A3 * J**3
    return g2 - G * G


# ---------------------------------------------------------------- eigenvalue


def test_eit_eigenvalue_is_dark(fig2):
    assert entrance_eigenvalue(*fig2) == pytest.approx(0.0, abs=1e-14)


def test_conventional_eigenvalue():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta2=100.0, delta3=150.0)
    b = BoundaryFields(1.0, 1.0)
    lam = entrance_eigenvalue(params, b)
    om1 = rabi(params.mu1, b.eta10)
    estimate = om1**2 / params.delta2
    assert lam == pytest.approx(estimate, rel=10 * (om1 / params.delta2) ** 2 + 1e-3)


def test_large_delta3_closed_form_converges():
    """Closed form for large delta3 versus the cubic root; the gap shrinks as 1/delta3^2."""
    errors = []
    for d3 in (20.0, 40.0, 80.0):
        params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta3=d3)
        b = BoundaryFields(1.0, 1.0)
        om1, om2 = rabi(params.mu1, b.eta10), rabi(params.mu2, b.eta20)
        x = params.delta2 - om2**2 / d3
        lam1 = -0.5 * x + 0.5 * math.sqrt(x * x + 4 * om1**2)
        lam = entrance_eigenvalue(params, b, branch=lam1)
        errors.append(abs(lam - lam1) / lam1)
        assert errors[-1] < 10 * (om2 / d3) ** 2
    assert errors[1] < errors[0] / 3 and errors[2] < errors[1] / 3


def test_eigenvalue_is_root_of_characteristic(fig2):
    params, b = GENERAL
    for branch in ("ground", "lower", "middle", "upper"):
        lam = entrance_eigenvalue(params, b, branch)
        c = characteristic_coefficients(rabi(params.mu1, 1.0), rabi(params.mu2, 0.8), 0.0, 0.0, 0.03, 0.0)
        assert abs(np.polyval(c, lam)) < 1e-12


def test_bad_branch_name(fig2):
    with pytest.raises(DomainError):
        entrance_eigenvalue(*fig2, branch="sideways")


# ---------------------------------------------------------------- coefficients


def test_perfect_matching_coefficients_vanish(fig2):
    co = mismatch_coefficients(fig2[0], 0.0, fig2[1])
    assert (co.A1, co.A2, co.A3) == (0.0, 0.0, 0.0)


def test_matched_q_kills_higher_terms():
    params, b = GENERAL
    co = mismatch_coefficients(params, 0.37, b)
    assert co.A2 == 0 and co.A3 == 0 and co.A1 != 0


def test_a3_is_q_cubed():
    params = GENERAL[0].with_(delta_k=0.013, N=2.0)
    co = mismatch_coefficients(params, 0.2, GENERAL[1])
    assert co.A3 == params.q**3


def test_eit_limit_of_coefficients():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta2=1e-3, delta_k=2e-3)
    b = BoundaryFields(1e-4, 1.0)
    lam = entrance_eigenvalue(params, b)
    exact = mismatch_coefficients(params, lam, b)
    eit = mismatch_coefficients(params, lam, b, model="eit")
    assert eit.A1 == -params.q * params.mu2 * b.eta20 - params.mu3 * params.delta2
    assert eit.a0 == -params.mu2 * b.eta20
    assert exact.A1 == pytest.approx(eit.A1, rel=1e-3)
    assert exact.a0 == pytest.approx(eit.a0, rel=1e-3)


def test_coefficients_need_vacuum_signal(fig2):
    with pytest.raises(DomainError):
        mismatch_coefficients(fig2[0], 0.0, BoundaryFields(1.0, 1.0, eta30=0.1))


# ---------------------------------------------------------------- exchange polynomial


def test_polynomial_vanishes_at_zero():
    params, b = GENERAL
    co = mismatch_coefficients(params.with_(delta_k=0.02), 0.1, b)
    assert np.polyval(exchange_polynomial(params, co, b), 0.0) == 0.0


def test_polynomial_roots_without_mismatch(fig2):
    params = fig2[0]
    b = BoundaryFields(0.6, 1.3)
    co = mismatch_coefficients(params, 0.0, b)
    roots = np.sort(np.roots(np.trim_zeros(exchange_polynomial(params, co, b), "f")).real)
    np.testing.assert_allclose(roots, [0.0, 0.6, 1.3], atol=1e-12)


def test_polynomial_matches_direct_expression():
    rng = np.random.default_rng(7)
    params = MediumParams(N=1.3, mu1=0.07, mu2=0.6, mu3=1.1, delta2=0.4, delta3=-0.9, delta_k=0.05)
    b = BoundaryFields(0.9, 1.2)
    co = mismatch_coefficients(params, 0.31, b)
    J = rng.uniform(0, 1.5, 50)
    poly = np.polyval(exchange_polynomial(params, co, b), J)
    direct = _direct_exchange(params, co, b, J)
    scale = np.maximum(np.abs(direct), 1e-300)
    terms = 4 * params.mu_product * J * np.abs((0.9 - J) * (1.2 - J)) + (co.A1 * J) ** 2
    assert np.max(np.abs(poly - direct) / np.maximum(scale, terms)) < 1e-12


# ---------------------------------------------------------------- turning points


def test_roots_without_mismatch():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    b = BoundaryFields(0.7, 1.2)
    J1, J2, B1 = oscillation_roots(params, mismatch_coefficients(params, 0.0, b), b)
    assert (J1, J2, B1) == (0.7, 1.2, 0.0)


def test_equal_inputs_root_split():
    """J2,1 = eta0 (1 +- dk'/(2 kappa_e)) for a small EIT mismatch."""
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    eta0 = 1.0
    kap_e = 0.5 * math.sqrt(params.mu1 * params.mu3 / (params.mu2 * eta0))
    dkp = 1e-3 * kap_e
    # dk' = -(N/2) A1 / a0 with a0 = -mu2 eta0, realised through delta2
    delta2 = -2 * dkp * params.mu2 * eta0 / (params.N * params.mu3)
    p = params.with_(delta2=delta2)
    b = BoundaryFields(eta0, eta0)
    J1, J2, _ = oscillation_roots(p, mismatch_coefficients(p, 0.0, b, model="eit"), b)
    r = dkp / (2 * kap_e)
    assert J1 == pytest.approx(eta0 * (1 - r), rel=1e-6)
    assert J2 == pytest.approx(eta0 * (1 + r), rel=1e-6)


def test_roots_match_polynomial_roots():
    params, b = GENERAL
    sol = solve(params, b)
    roots = np.roots(np.trim_zeros(exchange_polynomial(params, sol.coefficients, b), "f"))
    positive = np.sort(roots[(np.abs(roots.imag) < 1e-9) & (roots.real > 1e-12)].real)
    assert sol.J1 == pytest.approx(positive[0], rel=1e-12)
    assert sol.J2 == pytest.approx(positive[1], rel=1e-12)


def test_root_bounds_hold():
    params, b = GENERAL
    sol = solve(params, b)
    assert 0 <= sol.J1 <= min(b.eta10, b.eta20) <= sol.J2
    assert sol.B1 >= 0
    assert 0 <= sol.modulus <= 1


def test_higher_order_guard_warns():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta_k=0.5)
    b = BoundaryFields(1.0, 1.0)
    co = mismatch_coefficients(params, 0.0, b)
    with pytest.warns(RegimeWarning):
        oscillation_roots(params, co, b)


# ---------------------------------------------------------------- kappa


def test_kappa_eit_limit():
    params = MediumParams(N=1.7, mu1=0.05, mu2=0.5, mu3=1.0)
    eta20 = 2.0
    expected = 0.5 * params.N * math.sqrt(params.mu1 * params.mu3 / (params.mu2 * eta20))
    assert conversion_coefficient(params, eta20, -params.mu2 * eta20) == pytest.approx(expected, rel=1e-15)
    sol = solve(params, BoundaryFields(1e-4, eta20))
    assert sol.kappa == pytest.approx(expected, rel=1e-4)


def test_kappa_conventional_limit():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0, delta2=100.0, delta3=150.0)
    b = BoundaryFields(1.0, 1.0)
    sol = solve(params, b, model="conventional")
    expected = 0.5 * params.N * math.sqrt(params.mu_product * sol.J2) / (params.delta2 * params.delta3)
    assert sol.kappa == pytest.approx(expected, rel=1e-14)
    exact = solve(params, b)
    assert exact.kappa == pytest.approx(expected, rel=1e-3)


def test_kappa_linear_in_density_at_fixed_q():
    params, b = GENERAL
    base = params.with_(delta_k=0.0004)
    k1 = solve(base, b).kappa
    k3 = solve(base.with_(N=3.0, delta_k=3 * base.delta_k), b).kappa
    assert k3 == pytest.approx(3 * k1, rel=1e-13)


def test_vanishing_a0():
    with pytest.raises(VanishingA0):
        conversion_coefficient(GENERAL[0], 1.0, 0.0)


# ---------------------------------------------------------------- implicit solution


def test_distance_zero_at_vacuum():
    sol = solve(*GENERAL)
    assert implicit_distance(0.0, sol) == 0.0


def test_distance_undepleted_arcsin():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.45, mu3=0.5)
    b = BoundaryFields(1e-6, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        sol = solve(params, b, model="eit")
    assert sol.a1 == 0 and sol.A1 == 0
    kap_e = 0.5 * params.N * math.sqrt(params.mu1 * params.mu3 / (params.mu2 * b.eta20))
    J = np.linspace(0, sol.J1, 9)
    np.testing.assert_allclose(implicit_distance(J, sol), np.arcsin(np.sqrt(J / b.eta10)) / kap_e, rtol=1e-5)


def test_quarter_distance_against_raw_integral():
    params, b = GENERAL
    sol = solve(params, b)
    co = sol.coefficients

    def integrand(theta):
        # J = J1 sin^2(theta) removes the inverse square-root end singularities
        J = sol.J1 * math.sin(theta) ** 2
        dJ = 2 * sol.J1 * math.sin(theta) * math.cos(theta)
        return abs(co.a0 + co.a1 * J + co.a2 * J * J) * dJ / math.sqrt(_direct_exchange(params, co, b, J))

    val, _ = quad(integrand, 0, math.pi / 2, epsabs=0, epsrel=1e-13, limit=200)
    z_quarter = 2 * val / params.N
    assert implicit_distance(sol.J1, sol) == pytest.approx(z_quarter, rel=1e-9)
    assert sol.quarter_distance == pytest.approx(z_quarter, rel=1e-9)


def test_second_and_third_kind_forms_agree():
    sol = solve(*GENERAL)
    J = np.linspace(0, sol.J1, 17)
    np.testing.assert_allclose(implicit_distance(J, sol, form="E"), implicit_distance(J, sol, form="Pi"), rtol=1e-11, atol=1e-12)


def test_distance_outside_range():
    sol = solve(*GENERAL)
    with pytest.raises(DomainError):
        implicit_distance(1.01 * sol.J1, sol)
    with pytest.raises(DomainError):
        implicit_distance(-1e-3, sol)


def test_round_trip_identity():
    sol = solve(*GENERAL)
    J = np.linspace(0, sol.J1, 41)
    back = exchange_at(implicit_distance(J, sol), sol).J
    assert np.max(np.abs(back - J)) <= 1e-9 * sol.J1


def test_exchange_at_entrance(fig2):
    assert exchange_at(0.0, solve(*fig2)).J == 0.0


def test_distance_is_monotone():
    sol = solve(*GENERAL)
    z = implicit_distance(np.linspace(0, sol.J1, 200), sol)
    assert np.all(np.diff(z) > 0)


# ---------------------------------------------------------------- trajectories


def test_matched_equal_inputs_against_arth(fig2):
    params, b = fig2
    sol = solve(params, b)
    assert sol.monotone
    z = np.linspace(0, 40, 81)
    np.testing.assert_allclose(exchange_at(z, sol).J, eit_depleted(z, params, 1.0), atol=1e-8)


def test_against_canonical_over_three_periods():
    params, b = GENERAL
    sol = solve(params, b)
    z = np.linspace(0, 3 * sol.period, 301)
    traj = integrate_canonical(params, b, z, IntegratorConfig(rtol=1e-12, atol=1e-14), kappa=sol.kappa)
    st = exchange_at(z, sol)
    assert np.max(np.abs(st.J - traj.J)) <= 1e-6 * sol.J1
    # the phase is undefined where J = 0
    inner = st.J > 1e-6 * sol.J1
    assert np.max(np.abs(np.cos(st.phi[inner]) - np.cos(traj.phi[inner]))) <= 1e-6


def test_period_rule_against_canonical():
    params, b = GENERAL
    sol = solve(params, b)
    z = np.linspace(0, 1.5 * sol.period, 3001)
    traj = integrate_canonical(params, b, z, IntegratorConfig(rtol=1e-12, atol=1e-14), kappa=sol.kappa)
    returns = z[1:-1][(traj.J[1:-1] < traj.J[:-2]) & (traj.J[1:-1] <= traj.J[2:])]
    assert returns[0] == pytest.approx(sol.period, rel=1e-3)


def test_manley_rowe_along_trajectory():
    sol = solve(*GENERAL)
    st = exchange_at(np.linspace(0, 2 * sol.period, 50), sol)
    e1, e2, e3 = fluxes_at(st.J, sol.boundary)
    np.testing.assert_allclose(e1 + e3, 1.0, rtol=1e-15)
    np.testing.assert_allclose(e1 - e2, 0.2, rtol=1e-14)


def test_fluxes_at_entrance_and_turning_point():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    b = BoundaryFields(1.0, 0.6)
    assert fluxes_at(0.0, b) == (1.0, 0.6, 0.0)
    sol = solve(params, b)
    e1, e2, e3 = fluxes_at(sol.J1, b)
    assert e2 == pytest.approx(0.0, abs=1e-15) and e3 == pytest.approx(0.6, rel=1e-15)


def test_eigenvalue_conserved_along_trajectory():
    """lam + q J stays a root of the characteristic cubic at the local fields."""
    params, b = GENERAL
    params = params.with_(delta_k=0.001)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        sol = solve(params, b)
    z = np.linspace(0, sol.period, 40)
    traj = integrate_canonical(params, b, z, IntegratorConfig(rtol=1e-12, atol=1e-14), kappa=sol.kappa)
    lam0 = eigenvalue_along(traj.J, sol)
    for J, phi, lam in zip(traj.J, traj.phi, lam0):
        e1, e2, e3 = fluxes_at(J, b)
        c = characteristic_coefficients(
            rabi(params.mu1, e1), rabi(params.mu2, e2), rabi(params.mu3, e3), phi, params.delta2, params.delta3
        )
        assert abs(np.polyval(c, lam)) <= 1e-8


# ---------------------------------------------------------------- phase


def test_phase_constant_when_matched():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    b = BoundaryFields(1.0, 0.7)
    sol = solve(params, b)
    T = sol.period
    rising = np.linspace(0.01, 0.49, 20) * T
    falling = np.linspace(0.51, 0.99, 20) * T
    phr = phase_at(rising, exchange_at(rising, sol).J, sol)
    phf = phase_at(falling, exchange_at(falling, sol).J, sol)
    np.testing.assert_allclose(np.abs(phr), math.pi / 2, atol=1e-12)
    np.testing.assert_allclose(phr, phr[0], atol=1e-12)
    # the sign flips at the turning point where eta2 is exhausted
    np.testing.assert_allclose(phf, -phr[0], atol=1e-12)


def test_phase_grows_signal():
    """sin(phi) carries the sign that makes J grow from vacuum."""
    sol = solve(*GENERAL)
    z = np.array([0.1, 0.2]) * sol.period
    assert np.all(np.diff(exchange_at(z, sol).J) > 0)


# ---------------------------------------------------------------- atomic state


def test_bare_ground_state_without_fields():
    st = atomic_state(0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0)
    np.testing.assert_allclose([st.c1, st.c2, st.c3], [1, 0, 0], atol=1e-15)


def test_degenerate_state_is_reported():
    with pytest.raises(BranchAmbiguity):
        atomic_state(0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0)


def test_eit_entrance_dark_state():
    om1, om2, phi = 0.05, 1.0, 0.3
    st = atomic_state(om1, om2, 0.0, phi, 0.0, 0.0, 0.0)
    expected = np.array([om2, 0.0, -om1 * np.exp(-1j * phi)]) / math.hypot(om1, om2)
    np.testing.assert_allclose([st.c1, st.c2, st.c3], expected, atol=1e-12)


def test_maxcoh_entrance_state():
    # mu1 small keeps Omega/delta3 small on the matched line
    params = MediumParams(N=1.0, mu1=0.002, mu2=0.5, mu3=1.0)
    zeta = maxcoh_zeta(params)
    assert zeta == pytest.approx(math.sqrt(2))
    eta0 = 1.0
    d3 = math.sqrt(params.mu3 * eta0 * (params.mu3 - params.mu2) / params.mu1)
    om1, om2 = rabi(params.mu1, eta0), rabi(params.mu2, eta0)
    st = atomic_state(om1, om2, 0.0, 0.0, 0.0, d3, om1 * zeta)
    psi0 = np.array([1, -zeta, 0]) / math.sqrt(1 + zeta**2)
    overlap = abs(np.vdot(psi0, [st.c1, st.c2, st.c3])) ** 2
    assert 1 - overlap < 10 * (om2 / d3) ** 2


def test_eigen_residual_along_trajectory():
    params, b = GENERAL
    sol = solve(params, b)
    z = np.linspace(0, sol.period, 25)
    st = exchange_at(z, sol)
    amps = atomic_state_at(z, sol, st)
    e1, e2, e3 = fluxes_at(st.J, b)
    for k in range(z.size):
        h = hamiltonian_matrix(
            rabi(params.mu1, e1[k]), rabi(params.mu2, e2[k]), rabi(params.mu3, e3[k]), st.phi[k], params.delta2, params.delta3
        )
        lam = eigenvalue_along(st.J[k], sol)
        assert np.linalg.norm((h - lam * np.eye(3)) @ amps[k]) <= 1e-9 * np.linalg.norm(h, 2)
        assert np.sum(np.abs(amps[k]) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_undepleted_limit_recovers_sinusoid():
    params = MediumParams(N=1.0, mu1=0.05, mu2=0.5, mu3=1.0)
    b = BoundaryFields(1e-3, 1.0)
    sol = solve(params, b)
    kap_e = 0.5 * math.sqrt(params.mu1 * params.mu3 / (params.mu2 * b.eta20))
    z = np.linspace(0, 2 * math.pi / kap_e, 101)
    expected = b.eta10 * np.sin(kap_e * z) ** 2
    assert np.max(np.abs(exchange_at(z, sol).J - expected)) <= 1e-2 * b.eta10
