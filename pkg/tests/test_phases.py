import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aaphase.errors import ConstraintMismatchError, DegenerateNullspaceError, NotCyclicError
from aaphase.model import ModelParams, polar_decomposition, rabi
from aaphase.phases import (
    Branch,
    aa_phase_numeric,
    beta_half_integer_formula,
    beta_integer_formula,
    beta_rabi_formula,
    case_generic_T,
    case_half_integer_m,
    case_integer_n,
    commensurate,
    commensurate_coupling,
    commensurate_phi,
    det_M,
    det_Mtilde,
    detect_cyclic,
    dynamical_phase,
    dynamical_phase_quad,
    matrix_Mtilde,
    mean_energy,
    mean_energy_direct,
    null_vector,
    phase_distance,
    rabi_cycle_n1,
    rabi_cycle_special,
    wrap,
)
from aaphase.phases import generic_T_state
from aaphase.model import spectrum
from aaphase.propagator import InitialState

from conftest import params, states

INTEGER = ModelParams(0.0, 1.0, math.sqrt(3), 1.0)
HALF = ModelParams(0.0, 1.0, math.sqrt(5) / 2, 1.0)
GENERIC = ModelParams(0.0, 1.0, 0.5, 0.7)
RABI1 = ModelParams(0.0, 1.0, math.sqrt(0.23), 1.2)
RABI_SPECIAL = ModelParams(0.0, 1.0, 0.9, 1.0)

alphas = st.floats(0.0, 2 * math.pi)


def assert_mod2pi(a, b, tol):
    assert phase_distance(a, b) <= tol, (a, b)


def test_wrap():
    assert wrap(math.pi) == pytest.approx(math.pi)
    assert wrap(-math.pi) == pytest.approx(math.pi)
    assert wrap(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert phase_distance(0.1, 0.1 + 4 * math.pi) <= 1e-15


# --- energy and dynamical phase ----------------------------------------------


def test_mean_energy_eigenstates():
    p = ModelParams(0.2, 1.3, 0.7, 0.9)
    assert mean_energy(p, InitialState(1, 0), 0.0) == pytest.approx(spectrum(p).e1, abs=1e-14)
    p0 = p.replace(d0=0.0)
    for t in (0.0, 1.0, 17.3):
        assert mean_energy(p0, InitialState(0, 1), t) == pytest.approx(spectrum(p0).e2, abs=1e-14)


@given(params(), states(), st.floats(0, 40))
def test_mean_energy_identity(p, s, t):
    assert abs(mean_energy(p, s, t) - mean_energy_direct(p, s, t)) <= 1e-11 * max(1.0, abs(p.eps2))


def test_dynamical_phase_examples():
    p = ModelParams(0.2, 1.3, 0.0, 0.9)
    assert dynamical_phase(p, InitialState(1, 0), 1.0) == pytest.approx(spectrum(p).e1, abs=1e-14)
    s = InitialState(1, 0)
    assert abs(dynamical_phase(INTEGER, s, 2 * math.pi) - dynamical_phase_quad(INTEGER, s, 2 * math.pi)) <= 1e-9


@settings(max_examples=40)
@given(params(), states(), st.floats(0.1, 20))
def test_dynamical_phase_quadrature(p, s, tau):
    assert abs(dynamical_phase(p, s, tau) - dynamical_phase_quad(p, s, tau)) <= 1e-9 * max(1.0, tau)


@given(params(), states(), st.floats(-3, 3), st.floats(0.1, 20))
def test_dynamical_phase_trace_shift(p, s, c, tau):
    shifted = ModelParams(p.eps1 + c, p.eps2 + c, p.d0, p.omega, p.phi0)
    assert dynamical_phase(shifted, s, tau) - dynamical_phase(p, s, tau) == pytest.approx(c * tau, abs=1e-9)


# --- cyclicity ---------------------------------------------------------------


@given(states())
def test_detect_cyclic_integer(s):
    sol = detect_cyclic(INTEGER, s, INTEGER.period)
    assert sol is not None and sol.fidelity_defect <= 1e-9
    assert_mod2pi(sol.phi, -math.pi - 0.5 * INTEGER.trace * INTEGER.period, 1e-9)


def test_detect_cyclic_negative():
    p = ModelParams(0.0, 1.0, 0.3, 1.0)
    assert detect_cyclic(p, InitialState(1, 0), p.period) is None
    p0 = ModelParams(0.0, 1.0, 0.0, 1.0)
    assert detect_cyclic(p0, InitialState.normalized(1, 1), 1.0) is None
    assert detect_cyclic(p0, InitialState(0, 1), 1.0) is not None
    with pytest.raises(ValueError):
        detect_cyclic(p0, InitialState(0, 1), 0.0)


def test_numeric_requires_cyclic():
    p = ModelParams(0.0, 1.0, 0.3, 1.0)
    with pytest.raises(NotCyclicError) as info:
        aa_phase_numeric(p, InitialState(1, 0), p.period)
    assert info.value.fidelity_defect > 1e-3


@pytest.mark.parametrize("k", [1, 2, 5])
def test_numeric_stationary_beta_zero(k):
    p = ModelParams(0.0, 1.0, 0.0, 0.7)
    rec = aa_phase_numeric(p, InitialState(1, 0), 2 * math.pi * k / p.delta_eps)
    assert_mod2pi(rec.beta, 0.0, 1e-9)


@given(states(), alphas)
def test_gauge_invariance(s, alpha):
    a = aa_phase_numeric(INTEGER, s, INTEGER.period)
    b = aa_phase_numeric(INTEGER, s.with_global_phase(alpha), INTEGER.period)
    assert_mod2pi(a.beta, b.beta, 1e-10)
    assert_mod2pi(a.phi, b.phi, 1e-10)
    ra = rabi_cycle_n1(RABI1, s)
    rb = rabi_cycle_n1(RABI1, s.with_global_phase(alpha))
    assert_mod2pi(ra.beta, rb.beta, 1e-10)


# --- drive-period branches ---------------------------------------------------


def test_integer_examples():
    # both signs of the population term, oracle checked
    target = math.pi * math.sqrt(13) * 49 / 52
    r1 = case_integer_n(INTEGER, 2, InitialState(1, 0))
    r2 = case_integer_n(INTEGER, 2, InitialState(0, 1))
    assert r1.beta == pytest.approx(-math.pi - target, abs=1e-12)
    assert r2.beta == pytest.approx(-math.pi + target, abs=1e-12)
    for r in (r1, r2):
        assert_mod2pi(r.beta, aa_phase_numeric(INTEGER, r.s0, r.tau).beta, 1e-8)
        assert r.branch is Branch.INTEGER_N and r.tau == INTEGER.period


@settings(max_examples=30)
@given(states())
def test_integer_matches_numeric(s):
    r = case_integer_n(INTEGER, 2, s)
    assert abs(r.closure) <= 1e-10 * max(1.0, abs(r.beta))
    assert_mod2pi(r.beta, aa_phase_numeric(INTEGER, s, r.tau).beta, 1e-8)


def test_integer_constraint():
    with pytest.raises(ConstraintMismatchError) as info:
        case_integer_n(INTEGER.replace(d0=1.7), 2, InitialState(1, 0))
    assert info.value.ratio == pytest.approx(rabi(INTEGER.replace(d0=1.7)).gamma)
    with pytest.raises(ValueError):
        case_integer_n(INTEGER, 1.5, InitialState(1, 0))


@settings(max_examples=30)
@given(states())
def test_half_integer_matches_numeric(s):
    r = case_half_integer_m(HALF, 1.5, s)
    sol = detect_cyclic(HALF, s, HALF.period)
    assert sol is not None
    assert_mod2pi(sol.phi, r.phi, 1e-9)
    assert_mod2pi(r.beta, aa_phase_numeric(HALF, s, r.tau).beta, 1e-8)


def test_half_integer_example():
    f = polar_decomposition(HALF)
    assert f.cos_theta == pytest.approx(-0.5 / math.sqrt(1.5))
    r = case_half_integer_m(HALF, 1.5, InitialState(1, 0))
    k2s2 = f.sin_theta ** 2 / 9
    assert r.beta == pytest.approx(math.pi / f.cos_theta * (1 - k2s2), abs=1e-12)
    with pytest.raises(ValueError):
        case_half_integer_m(HALF, 2.0, InitialState(1, 0))


@given(params(), states(), st.integers(1, 6))
def test_half_angle_identity(p, s, twice):
    m = twice + 0.5
    diff = beta_half_integer_formula(p, m, s) - beta_integer_formula(p, m, s)
    assert diff == pytest.approx(math.pi, abs=1e-10)


@pytest.mark.parametrize("sign", [1, -1])
def test_generic_T(sign):
    sol, r = case_generic_T(GENERIC, sign)
    assert rabi(GENERIC).gamma == pytest.approx(math.sqrt(0.9725))
    assert abs(np.linalg.norm(r.s0.vector) - 1) <= 1e-14
    assert r.s0.c1_0.imag == 0 and r.s0.c2_0.imag == 0
    assert sol.fidelity_defect <= 1e-9
    assert_mod2pi(sol.phi, r.phi, 1e-8)
    assert_mod2pi(r.beta, aa_phase_numeric(GENERIC, r.s0, r.tau).beta, 1e-8)
    _, shifted = case_generic_T(GENERIC, sign, delta1=1.3)
    assert abs(shifted.beta - r.beta) <= 1e-10
    assert r.branch is (Branch.GENERIC_T_PLUS if sign > 0 else Branch.GENERIC_T_MINUS)


def test_generic_T_distinct_states():
    a = generic_T_state(GENERIC, 1)
    b = generic_T_state(GENERIC, -1)
    assert abs(np.vdot(a.vector, b.vector)) < 0.999


def test_generic_T_guard():
    with pytest.raises(ConstraintMismatchError):
        case_generic_T(INTEGER, 1)
    with pytest.raises(ConstraintMismatchError):
        case_generic_T(HALF, -1)


@settings(max_examples=60)
@given(params(d0=st.floats(0.05, 3.0)))
def test_generic_T_random(p):
    ratio = rabi(p).gamma / p.omega
    if abs(2 * ratio - round(2 * ratio)) < 1e-3:
        return
    for sign in (1, -1):
        sol, r = case_generic_T(p, sign)
        assert sol.fidelity_defect <= 1e-9
        assert_mod2pi(r.beta, r.phi + dynamical_phase(p, r.s0, r.tau), 1e-8)


def test_det_M_examples():
    g = rabi(GENERIC).gamma
    scale = (g * spectrum(GENERIC).etilde2) ** 2
    for gamma in (math.pi + g * GENERIC.period, math.pi - g * GENERIC.period):
        assert abs(det_M(GENERIC, gamma)) <= 1e-10 * scale
    assert abs(det_M(INTEGER, math.pi)) <= 1e-10 * (2 * spectrum(INTEGER).etilde2) ** 2
    # Gamma T = 3 pi (Gamma T = pi itself is unreachable): double root at gamma = 0
    assert rabi(HALF).gamma * HALF.period == pytest.approx(3 * math.pi)
    assert abs(det_M(HALF, 0.0)) <= 1e-10 * (rabi(HALF).gamma * spectrum(HALF).etilde2) ** 2


@settings(max_examples=100)
@given(params(d0=st.floats(0.05, 3.0)), st.floats(0, 2 * math.pi))
def test_det_M_away_from_roots(p, gamma):
    gt = rabi(p).gamma * p.period
    if min(phase_distance(gamma, math.pi + gt), phase_distance(gamma, math.pi - gt)) < 0.05:
        return
    scale = (rabi(p).gamma * spectrum(p).etilde2) ** 2
    assert abs(det_M(p, gamma)) > 1e-4 * scale


def test_commensurate_fixture(rng):
    p = ModelParams(0.0, 1.0, math.sqrt(0.5625 * 9 - 4), 3.0)
    assert commensurate_coupling(p, 3, 2) == pytest.approx(p.d0)
    phis = []
    for _ in range(10):
        sol, phi = commensurate(p, 3, 2, InitialState.random(rng))
        assert sol.tau == pytest.approx(2 * p.period)
        assert sol.fidelity_defect <= 1e-9
        assert_mod2pi(sol.phi, phi, 1e-9)
        phis.append(sol.phi)
    assert max(phase_distance(a, phis[0]) for a in phis) <= 1e-9
    with pytest.raises(ConstraintMismatchError):
        commensurate(p, 3, 1, InitialState(1, 0))


def test_commensurate_reduces_to_rabi_n1():
    assert_mod2pi(commensurate_phi(RABI1, 2, 1), rabi_cycle_n1(RABI1, InitialState(1, 0)).phi, 1e-12)


# --- Rabi period -------------------------------------------------------------


@settings(max_examples=30)
@given(states())
def test_rabi_n1(s):
    r = rabi_cycle_n1(RABI1, s)
    sol = detect_cyclic(RABI1, s, r.tau)
    assert sol is not None
    assert_mod2pi(sol.phi, r.phi, 1e-9)
    assert_mod2pi(r.beta, aa_phase_numeric(RABI1, s, r.tau).beta, 1e-8)
    # the gamma' = 0 form of the Rabi-period phase reduces to the same value on Gamma = omega
    assert_mod2pi(beta_rabi_formula(RABI1, s, Branch.RABI_GAMMA0), r.beta, 1e-10)
    assert_mod2pi(beta_rabi_formula(RABI1, s, Branch.RABI_GAMMA_OMEGA), r.beta, 1e-10)


def test_rabi_n1_population_sign():
    a = rabi_cycle_n1(RABI1, InitialState(1, 0)).beta + math.pi
    b = rabi_cycle_n1(RABI1, InitialState(0, 1)).beta + math.pi
    assert a == pytest.approx(-b, abs=1e-12)


@pytest.mark.parametrize("branch", ["rabi-gamma0", "rabi-gamma-omega"])
def test_rabi_special(branch):
    sol, r = rabi_cycle_special(RABI_SPECIAL, branch)
    t_rabi = rabi(RABI_SPECIAL).t_rabi
    assert r.tau == pytest.approx(t_rabi)
    assert sol.fidelity_defect <= 1e-9
    assert_mod2pi(sol.phi, r.phi, 1e-8)
    assert_mod2pi(r.beta, aa_phase_numeric(RABI_SPECIAL, r.s0, r.tau).beta, 1e-8)
    assert abs(det_Mtilde(RABI_SPECIAL, r.gamma_aux, t_rabi)) <= 1e-9
    assert r.s0.c1_0.imag == 0 and r.s0.c1_0.real >= 0


def test_rabi_special_distinct_and_offset():
    _, a = rabi_cycle_special(RABI_SPECIAL, "rabi-gamma0")
    _, b = rabi_cycle_special(RABI_SPECIAL, "rabi-gamma-omega")
    assert abs(np.vdot(a.s0.vector, b.s0.vector)) < 0.999
    s = InitialState.normalized(0.3, 0.8j)
    k = RABI_SPECIAL.omega / rabi(RABI_SPECIAL).gamma
    diff = beta_rabi_formula(RABI_SPECIAL, s, Branch.RABI_GAMMA_OMEGA) - beta_rabi_formula(
        RABI_SPECIAL, s, Branch.RABI_GAMMA0)
    assert diff == pytest.approx(2 * math.pi * k, abs=1e-12)


def test_rabi_special_root_representatives():
    # other 2 pi representatives of gamma' give the same state
    t_rabi = rabi(RABI_SPECIAL).t_rabi
    for gp in (0.0, RABI_SPECIAL.omega * t_rabi):
        v = null_vector(matrix_Mtilde(RABI_SPECIAL, gp, t_rabi))
        w = null_vector(matrix_Mtilde(RABI_SPECIAL, gp + 2 * math.pi, t_rabi))
        assert np.allclose(v, w, atol=1e-12)


def test_rabi_special_degenerate_on_n1():
    # Gamma = omega makes every state cyclic; the null space is the whole plane
    with pytest.raises(DegenerateNullspaceError):
        rabi_cycle_special(RABI1, "rabi-gamma0")


def test_det_Mtilde_on_drive_period_branches():
    for p, rec in ((INTEGER, case_integer_n(INTEGER, 2, InitialState(1, 0))),
                   (HALF, case_half_integer_m(HALF, 1.5, InitialState(1, 0))),
                   (GENERIC, case_generic_T(GENERIC, 1)[1]),
                   (GENERIC, case_generic_T(GENERIC, -1)[1])):
        gt = rec.phi + 0.5 * (p.trace + p.omega) * rec.tau
        assert abs(det_Mtilde(p, gt, rec.tau)) <= 1e-9


@settings(max_examples=100)
@given(st.floats(0.05, 3.0), st.floats(0.3, 3.0), st.floats(0, 2 * math.pi))
def test_det_Mtilde_away_from_roots(d0, omega, gp):
    p = ModelParams(0.0, 1.0, d0, omega)
    t_rabi = rabi(p).t_rabi
    wt = omega * t_rabi
    if min(phase_distance(gp, 0.0), phase_distance(gp, wt)) < 0.05 or phase_distance(wt, 0.0) < 0.05:
        return
    assert abs(det_Mtilde(p, gp, t_rabi)) > 1e-4


@given(states(), st.floats(-3, 3))
def test_energy_shift_covariance(s, c):
    for p, run in ((INTEGER, lambda q: case_integer_n(q, 2, s)),
                   (RABI1, lambda q: rabi_cycle_n1(q, s)),
                   (GENERIC, lambda q: aa_phase_numeric(q, generic_T_state(GENERIC, 1), q.period))):
        a, b = run(p), run(p.shifted(c))
        assert phase_distance(b.phi - a.phi, -c * a.tau) <= 1e-9
        assert b.dyn - a.dyn == pytest.approx(c * a.tau, abs=1e-9)
        assert phase_distance(b.beta, a.beta) <= 1e-9
