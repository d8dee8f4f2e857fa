"""Time evolution: closed-form amplitudes and an independent RK4 oracle.

A state is written in the instantaneous eigenbasis as

    |psi(t)> = ctilde_1(t) |phi_1; t> + ctilde_2(t) |phi_2; t>,

and ``ctilde_j(t) = exp(-i (eps1 + eps2 + w) t / 2) g_j(t)`` where ``g_j``
oscillates at the Rabi frequency. The closed form is evolution from t = 0;
:func:`evolve_from` restarts it at a later time by shifting the drive phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from .errors import IntegrationError
from .model import ModelParams, eigenbasis, polar_decomposition, rabi, spectrum

NORM_TOL = 1e-12

# RK4 starts at this many steps per drive period and halves from there
BASE_STEPS_PER_PERIOD = 4096
MAX_TOTAL_STEPS = 1 << 27


@dataclass(frozen=True)
class InitialState:
    """Eigenbasis coefficients ``(c1(0), c2(0))`` of the state at t = 0."""

    c1_0: complex
    c2_0: complex

    def __post_init__(self):
        c1, c2 = complex(self.c1_0), complex(self.c2_0)
        object.__setattr__(self, "c1_0", c1)
        object.__setattr__(self, "c2_0", c2)
        norm2 = abs(c1) ** 2 + abs(c2) ** 2
        if not abs(norm2 - 1.0) <= NORM_TOL:
            raise ValueError(f"initial state must be normalized, |c1|^2 + |c2|^2 = {norm2!r}")

    @classmethod
    def normalized(cls, c1, c2) -> "InitialState":
        n = math.hypot(abs(complex(c1)), abs(complex(c2)))
        if n == 0:
            raise ValueError("zero vector cannot be normalized")
        return cls(complex(c1) / n, complex(c2) / n)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "InitialState":
        """Haar-random state."""
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.normalized(z[0], z[1])

    @classmethod
    def from_bare(cls, p: ModelParams, psi) -> "InitialState":
        c = to_eigen(p, psi, 0.0)
        return cls.normalized(c[0], c[1])

    @property
    def delta1(self) -> float:
        """Phase of c1(0) (0 when c1(0) vanishes)."""
        return cmath.phase(self.c1_0) if self.c1_0 != 0 else 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c1_0, self.c2_0], dtype=complex)

    def with_global_phase(self, alpha: float) -> "InitialState":
        u = cmath.exp(1j * alpha)
        return InitialState(self.c1_0 * u, self.c2_0 * u)

    def bare(self, p: ModelParams) -> np.ndarray:
        return to_bare(p, self.vector, 0.0)


@dataclass(frozen=True)
class AmplitudeState:
    t: float
    ctilde1: complex
    ctilde2: complex
    g1: complex
    g2: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.ctilde1, self.ctilde2], dtype=complex)

    def bare(self, p: ModelParams) -> np.ndarray:
        return to_bare(p, self.vector, self.t)


def _g_coefficients(p: ModelParams, c1, c2, t):
    """g_1(t), g_2(t) for arbitrary (not necessarily normalized) c(0); broadcasts over t."""
    f = polar_decomposition(p)
    gamma = rabi(p).gamma
    assert gamma > 0
    et2 = spectrum(p).etilde2
    t = np.asarray(t, dtype=float)
    cos_gt = np.cos(gamma * t)
    sin_over = np.sin(gamma * t) / gamma
    diag = et2 - 0.5 * p.omega * f.cos_theta
    off = 0.5 * p.omega * f.sin_theta
    g1 = c1 * cos_gt + 1j * sin_over * (diag * c1 - off * c2)
    g2 = c2 * cos_gt - 1j * sin_over * (diag * c2 + off * c1)
    return g1, g2


def _common_phase(p: ModelParams, t):
    return np.exp(-0.5j * (p.trace + p.omega) * np.asarray(t, dtype=float))


def closed_coefficients(p: ModelParams, coeffs, t) -> np.ndarray:
    """Linear closed-form map ``c(0) -> ctilde(t)``.

    Accepts any complex 2-vector (normalization is not required) and a
    scalar or array of times; returns shape ``(2,)`` or ``(len(t), 2)``.
    """
    c1, c2 = complex(coeffs[0]), complex(coeffs[1])
    g1, g2 = _g_coefficients(p, c1, c2, t)
    ph = _common_phase(p, t)
    return np.stack([ph * g1, ph * g2], axis=-1)


def evolve_closed(p: ModelParams, s0: InitialState, t: float) -> AmplitudeState:
    g1, g2 = _g_coefficients(p, s0.c1_0, s0.c2_0, t)
    ph = complex(_common_phase(p, t))
    g1, g2 = complex(g1), complex(g2)
    return AmplitudeState(t=float(t), ctilde1=ph * g1, ctilde2=ph * g2, g1=g1, g2=g2)


def closed_trajectory(p: ModelParams, s0: InitialState, times) -> np.ndarray:
    """Eigenbasis amplitudes on a time grid, shape ``(len(times), 2)``."""
    return closed_coefficients(p, s0.vector, np.atleast_1d(np.asarray(times, dtype=float)))


def bare_trajectory(p: ModelParams, s0: InitialState, times) -> np.ndarray:
    """Bare-basis closed-form state on a time grid, shape ``(len(times), 2)``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    c = closed_trajectory(p, s0, times)
    return np.einsum("tij,tj->ti", eigenbasis(p, times), c)


def to_bare(p: ModelParams, coeffs, t: float) -> np.ndarray:
    """Eigenbasis coefficients at time ``t`` -> bare-basis vector."""
    return eigenbasis(p, t) @ np.asarray(coeffs, dtype=complex)


def to_eigen(p: ModelParams, psi, t: float) -> np.ndarray:
    """Bare-basis vector -> eigenbasis coefficients at time ``t``."""
    return eigenbasis(p, t).conj().T @ np.asarray(psi, dtype=complex)


def basis_change(p: ModelParams, state, t: float,
                 direction: Literal["eigen->bare", "bare->eigen"]) -> np.ndarray:
    if direction == "eigen->bare":
        return to_bare(p, state, t)
    if direction == "bare->eigen":
        return to_eigen(p, state, t)
    raise ValueError(f"unknown direction {direction!r}")


def evolve_from(p: ModelParams, psi_bare, t_start: float, t_end: float) -> np.ndarray:
    """Propagate a bare-basis state known at ``t_start`` to ``t_end``.

    H(t_start + s) is H(s) with the drive phase moved by ``-omega*t_start``,
    so the closed form is reused in that shifted frame.
    """
    shifted = p.replace(phi0=p.phi0 - p.omega * t_start)
    c = to_eigen(shifted, psi_bare, 0.0)
    dt = t_end - t_start
    return to_bare(shifted, closed_coefficients(shifted, c, dt), dt)


def g_periodicity_check(p: ModelParams, s0: InitialState, n: int) -> float:
    """Largest ``|g_j(n T_Gamma) - g_j(0)|``; vanishes up to rounding."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    g1, g2 = _g_coefficients(p, s0.c1_0, s0.c2_0, n * rabi(p).t_rabi)
    return max(abs(complex(g1) - s0.c1_0), abs(complex(g2) - s0.c2_0))


# --- numerical oracle ------------------------------------------------------


@numba.njit(cache=True)
def _rhs(eps1, eps2, d0, omega, phi0, t, y0, y1):
    off = d0 * cmath.exp(-1j * (omega * t - phi0))
    h0 = eps1 * y0 + off * y1
    h1 = off.conjugate() * y0 + eps2 * y1
    return -1j * h0, -1j * h1


@numba.njit(cache=True)
def _rk4_segments(eps1, eps2, d0, omega, phi0, psi0, times, h):
    """Classic RK4 from t=0 through sorted ``times``, uniform steps of at most h per segment."""
    out = np.empty((times.shape[0], 2), dtype=np.complex128)
    y0 = psi0[0]
    y1 = psi0[1]
    t = 0.0
    for k in range(times.shape[0]):
        span = times[k] - t
        n = int(math.ceil(span / h)) if span > 0 else 0
        if n > 0:
            dt = span / n
            for _ in range(n):
                a0, a1 = _rhs(eps1, eps2, d0, omega, phi0, t, y0, y1)
                b0, b1 = _rhs(eps1, eps2, d0, omega, phi0, t + 0.5 * dt, y0 + 0.5 * dt * a0, y1 + 0.5 * dt * a1)
                c0, c1 = _rhs(eps1, eps2, d0, omega, phi0, t + 0.5 * dt, y0 + 0.5 * dt * b0, y1 + 0.5 * dt * b1)
                e0, e1 = _rhs(eps1, eps2, d0, omega, phi0, t + dt, y0 + dt * c0, y1 + dt * c1)
                y0 = y0 + dt / 6.0 * (a0 + 2.0 * b0 + 2.0 * c0 + e0)
                y1 = y1 + dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + e1)
                t += dt
        t = times[k]
        out[k, 0] = y0
        out[k, 1] = y1
    return out


def evolve_numeric_many(p: ModelParams, psi0_bare, times, tol: float = 1e-10) -> np.ndarray:
    """Integrate the Schrödinger equation in the bare basis.

    Runs fixed-step RK4 starting from ``T/4096`` and halves the step until
    the Richardson estimate ``max|y_h - y_{h/2}| / 15`` over all requested
    times is at most ``tol``. The finer solution is returned without
    renormalization, so its norm drift is a usable diagnostic.

    Parameters
    ----------
    p : ModelParams
    psi0_bare : array_like
        Unit-norm bare-basis state at t = 0.
    times : array_like
        Non-negative output times, any order.
    tol : float
        Target error, in ``[1e-13, 1e-6]``.

    Returns
    -------
    ndarray of shape (len(times), 2)

    Raises
    ------
    IntegrationError
        If the step count would exceed the cap before the tolerance is met.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-13, 1e-6], got {tol}")
    psi0 = np.asarray(psi0_bare, dtype=np.complex128)
    if psi0.shape != (2,) or abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("psi0_bare must be a unit-norm 2-vector")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite and non-negative")
    order = np.argsort(times, kind="stable")
    ts = np.ascontiguousarray(times[order])
    t_max = float(ts[-1]) if ts.size else 0.0

    args = (p.eps1, p.eps2, p.d0, p.omega, p.phi0, psi0, ts)
    h = p.period / BASE_STEPS_PER_PERIOD
    coarse = _rk4_segments(*args, h)
    err = math.inf
    while True:
        h *= 0.5
        if t_max / h > MAX_TOTAL_STEPS:
            raise IntegrationError(
                f"step cap exceeded before reaching tol={tol:g} (estimate {err:.3g})", err)
        fine = _rk4_segments(*args, h)
        err = float(np.max(np.abs(fine - coarse))) / 15.0 if ts.size else 0.0
        if err <= tol:
            break
        coarse = fine
    out = np.empty_like(fine)
    out[order] = fine
    return out


def evolve_numeric(p: ModelParams, psi0_bare, t: float, tol: float = 1e-10) -> np.ndarray:
    """Bare-basis state at a single time ``t`` from the RK4 oracle."""
    return evolve_numeric_many(p, psi0_bare, [t], tol)[0]
