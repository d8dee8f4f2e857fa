import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aaphase import propagator
from aaphase.errors import IntegrationError
from aaphase.model import ModelParams, rabi
from aaphase.propagator import (
    InitialState,
    basis_change,
    bare_trajectory,
    closed_coefficients,
    evolve_closed,
    evolve_from,
    evolve_numeric,
    evolve_numeric_many,
    g_periodicity_check,
)

from conftest import params, states

times = st.floats(0.0, 60.0, allow_nan=False)
complexes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_initial_state_validation():
    with pytest.raises(ValueError):
        InitialState(1.0, 0.1)
    s = InitialState.normalized(1j, 1j)
    assert s.delta1 == pytest.approx(math.pi / 2)
    assert s.with_global_phase(0.3).delta1 == pytest.approx(math.pi / 2 + 0.3)


def test_random_state_unit_norm(rng):
    for _ in range(20):
        s = InitialState.random(rng)
        assert abs(np.linalg.norm(s.vector) - 1) <= 1e-12


@given(params(), states())
def test_evolve_closed_at_zero(p, s):
    a = evolve_closed(p, s, 0.0)
    assert a.ctilde1 == pytest.approx(s.c1_0, abs=1e-15)
    assert a.ctilde2 == pytest.approx(s.c2_0, abs=1e-15)


@given(states(), times)
def test_decoupled_closed_form(s, t):
    p = ModelParams(0.0, 1.0, 0.0, 1.0)
    a = evolve_closed(p, s, t)
    assert abs(a.ctilde1 - s.c1_0) <= 1e-12
    assert abs(a.ctilde2 - s.c2_0 * cmath.exp(-2j * t)) <= 1e-12


def test_integer_resonance_returns():
    p = ModelParams(0.0, 1.0, math.sqrt(3), 1.0)
    a = evolve_closed(p, InitialState(1, 0), 2 * math.pi)
    assert abs(a.g1 - 1) <= 1e-12 and abs(a.g2) <= 1e-12
    psi0 = InitialState(1, 0).bare(p)
    psi = evolve_numeric(p, psi0, 2 * math.pi)
    assert 1 - abs(np.vdot(psi0, psi)) <= 1e-9


@settings(max_examples=300)
@given(params(), states(), times)
def test_unitarity(p, s, t):
    a = evolve_closed(p, s, t)
    assert abs(abs(a.ctilde1) ** 2 + abs(a.ctilde2) ** 2 - 1) <= 1e-12
    assert abs(abs(a.g1) - abs(a.ctilde1)) <= 1e-14
    phase = cmath.exp(-0.5j * (p.trace + p.omega) * t)
    assert abs(a.ctilde1 - phase * a.g1) <= 1e-14


@given(params(), complexes, complexes, complexes, complexes, complexes, complexes, times)
def test_linearity(p, a1, a2, b1, b2, alpha, beta, t):
    u = closed_coefficients(p, [a1, a2], t)
    v = closed_coefficients(p, [b1, b2], t)
    w = closed_coefficients(p, [alpha * a1 + beta * b1, alpha * a2 + beta * b2], t)
    scale = max(1.0, abs(alpha) * abs(a1 + a2) + abs(beta) * abs(b1 + b2))
    assert np.max(np.abs(w - (alpha * u + beta * v))) <= 1e-12 * scale


@given(params(), states(), times, times)
def test_composition(p, s, t1, t2):
    t1, t2 = sorted((t1, t2))
    direct = bare_trajectory(p, s, [t2])[0]
    mid = bare_trajectory(p, s, [t1])[0]
    assert np.max(np.abs(evolve_from(p, mid, t1, t2) - direct)) <= 1e-10


@given(params(), states(), st.floats(-30, 30))
def test_basis_round_trip(p, s, t):
    bare = basis_change(p, s.vector, t, "eigen->bare")
    back = basis_change(p, bare, t, "bare->eigen")
    assert np.max(np.abs(back - s.vector)) <= 1e-13


def test_basis_change_examples():
    p = ModelParams(0.0, 1.0, 0.0, 1.0)
    assert np.allclose(basis_change(p, [1, 0], 0.0, "eigen->bare"), [-1, 0], atol=1e-15)
    p = ModelParams(0.0, 1.0, 1e9, 1.0)
    assert np.allclose(basis_change(p, [0, 1], 0.0, "eigen->bare"), [1 / math.sqrt(2)] * 2, atol=1e-9)
    with pytest.raises(ValueError):
        basis_change(p, [0, 1], 0.0, "sideways")


def test_numeric_decoupled():
    p = ModelParams(0.3, 1.0, 0.0, 0.8)
    for t in (0.0, 1.7, 13.0):
        psi = evolve_numeric(p, [1, 0], t)
        assert np.allclose(psi, [cmath.exp(-0.3j * t), 0], atol=1e-9)


def test_numeric_matches_closed_form(rng):
    for _ in range(5):
        p = ModelParams(0.0, 1.0, rng.uniform(0, 3), rng.uniform(0.05, 3), rng.uniform(0, 2 * math.pi))
        s = InitialState.random(rng)
        ts = np.linspace(0.1, 5, 50) * p.period
        closed = bare_trajectory(p, s, ts)
        numeric = evolve_numeric_many(p, s.bare(p), ts, tol=1e-10)
        assert np.max(np.abs(closed - numeric)) <= 1e-7
        drift = np.abs(np.linalg.norm(numeric, axis=1) - 1).max()
        assert drift <= 10 * 1e-10


def test_numeric_unsorted_times():
    p = ModelParams(0.0, 1.0, 0.4, 0.9)
    ts = [3.0, 0.5, 2.0]
    out = evolve_numeric_many(p, [1, 0], ts)
    for t, row in zip(ts, out):
        assert np.allclose(row, evolve_numeric(p, [1, 0], t), atol=1e-9)


def test_numeric_validation():
    p = ModelParams(0.0, 1.0, 0.4, 0.9)
    with pytest.raises(ValueError):
        evolve_numeric(p, [1, 0], 1.0, tol=1e-3)
    with pytest.raises(ValueError):
        evolve_numeric(p, [1, 1], 1.0)
    with pytest.raises(ValueError):
        evolve_numeric(p, [1, 0], -1.0)


def test_numeric_step_cap(monkeypatch):
    # room for exactly one halving
    monkeypatch.setattr(propagator, "MAX_TOTAL_STEPS", 2_000_000)
    p = ModelParams(0.0, 1.0, 2.0, 0.5)
    with pytest.raises(IntegrationError) as info:
        evolve_numeric(p, [1, 0], 200 * p.period, tol=1e-13)
    assert 1e-13 < info.value.error_estimate < math.inf


@given(params(), states(), st.integers(1, 3))
def test_g_periodicity(p, s, n):
    assert g_periodicity_check(p, s, n) <= 1e-11


def test_g_periodicity_decoupled():
    p = ModelParams(0.0, 1.0, 0.0, 1.0)
    assert g_periodicity_check(p, InitialState.normalized(1, 1j), 1) <= 1e-15
    assert rabi(p).t_rabi == pytest.approx(2 * math.pi)
