"""Static data of the driven two-level model.

The Hamiltonian in the bare basis {|1>, |2>} is

    H(t) = [[eps1,                 D0 exp(-i(w t - phi0))],
            [D0 exp(+i(w t - phi0)),  eps2               ]]

which is the same as a spin-1/2 in a field precessing about z,

    H(t) = (eps1 + eps2)/2 + (1/2) B(t) . sigma,
    B(t) = (2 D0 cos(w t - phi0), 2 D0 sin(w t - phi0), -(eps2 - eps1)).

Natural units (hbar = 1) are used and the magnetic moment is fixed to 1,
so B(t) is measured in energy units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ModelParams:
    """A parameter point of the model.

    Parameters
    ----------
    eps1, eps2 : float
        Bare level energies, ``eps1 < eps2``.
    d0 : float
        Dipole-field coupling ``D0 >= 0``.
    omega : float
        Drive angular frequency, ``omega > 0``.
    phi0 : float
        Drive phase; stored reduced to ``[0, 2*pi)``.
    """

    eps1: float
    eps2: float
    d0: float
    omega: float
    phi0: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "d0", "omega", "phi0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.eps2 > self.eps1:
            raise ValueError(f"need eps2 > eps1 (non-degenerate levels), got eps1={self.eps1}, eps2={self.eps2}")
        if self.d0 < 0:
            raise ValueError(f"d0 must be >= 0, got {self.d0}")
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        object.__setattr__(self, "phi0", self.phi0 % TWO_PI)

    @property
    def delta_eps(self) -> float:
        return self.eps2 - self.eps1

    @property
    def trace(self) -> float:
        """eps1 + eps2."""
        return self.eps1 + self.eps2

    @property
    def period(self) -> float:
        """Drive period T = 2 pi / omega."""
        return TWO_PI / self.omega

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def shifted(self, c: float) -> "ModelParams":
        """Same point with both bare energies moved by ``c``."""
        return replace(self, eps1=self.eps1 + c, eps2=self.eps2 + c)

    @classmethod
    def from_vectors(cls, eps1, eps2, d12, e0, omega, phi0=0.0) -> "ModelParams":
        """Build the parameter point from the dipole and field-amplitude vectors."""
        d0, shift = dipole_coupling(d12, e0)
        return cls(eps1=eps1, eps2=eps2, d0=d0, omega=omega, phi0=phi0 + shift)


@dataclass(frozen=True)
class EffectiveField:
    """Polar form of the precessing effective field.

    ``theta`` lies in ``[pi/2, pi]``. The half-angle values are computed
    from the field components directly, not by evaluating trig at theta/2.
    """

    theta: float
    b_norm: float
    cos_half: float
    sin_half: float
    cos_theta: float
    sin_theta: float


@dataclass(frozen=True)
class Spectrum:
    """Dressed eigenvalues ``e1 <= e2`` and the half splitting ``etilde2``."""

    e1: float
    e2: float
    etilde2: float

    @property
    def etilde1(self) -> float:
        return -self.etilde2


@dataclass(frozen=True)
class RabiData:
    gamma: float
    t_field: float
    t_rabi: float


def dipole_coupling(d12, e0) -> tuple[float, float]:
    """Coupling strength from the transition dipole and the field amplitude.

    Returns ``(d0, phi0_shift)`` with ``d0 = |d12 . e0|``. A negative dot
    product is absorbed into the drive phase, giving ``phi0_shift = pi``.
    """
    d12 = np.asarray(d12, dtype=float)
    e0 = np.asarray(e0, dtype=float)
    if d12.shape != (3,) or e0.shape != (3,):
        raise ValueError("d12 and e0 must be real 3-vectors")
    if not (np.all(np.isfinite(d12)) and np.all(np.isfinite(e0))):
        raise ValueError("d12 and e0 must be finite")
    dot = float(d12 @ e0)
    return abs(dot), (0.0 if dot >= 0 else math.pi)


def _drive_angle(p: ModelParams, t):
    return p.omega * np.asarray(t, dtype=float) - p.phi0


def effective_field_at(p: ModelParams, t: float) -> np.ndarray:
    a = p.omega * t - p.phi0
    return np.array([2 * p.d0 * math.cos(a), 2 * p.d0 * math.sin(a), -p.delta_eps])


def _etilde2(p: ModelParams) -> float:
    return math.hypot(p.d0, 0.5 * p.delta_eps)


def polar_decomposition(p: ModelParams) -> EffectiveField:
    et2 = _etilde2(p)
    half_de = 0.5 * p.delta_eps
    cos_theta = -half_de / et2
    sin_theta = p.d0 / et2
    # 1 -+ (de/2)/E2 rewritten without cancellation near theta = pi
    cos_half = p.d0 / math.sqrt(2.0 * et2 * (et2 + half_de))
    sin_half = math.sqrt(0.5 * (1.0 + half_de / et2))
    theta = math.atan2(sin_theta, cos_theta)
    return EffectiveField(
        theta=theta,
        b_norm=2.0 * et2,
        cos_half=cos_half,
        sin_half=sin_half,
        cos_theta=cos_theta,
        sin_theta=sin_theta,
    )


def hamiltonian_at(p: ModelParams, t: float) -> np.ndarray:
    """Bare-basis Hamiltonian matrix at time ``t``."""
    off = p.d0 * np.exp(-1j * (p.omega * t - p.phi0))
    return np.array([[p.eps1, off], [np.conj(off), p.eps2]], dtype=complex)


def hamiltonian_spin_form(p: ModelParams, t: float) -> np.ndarray:
    """The same Hamiltonian assembled as trace/2 + B(t).sigma/2."""
    bx, by, bz = effective_field_at(p, t)
    return 0.5 * p.trace * np.eye(2) + 0.5 * (bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z)


def spectrum(p: ModelParams) -> Spectrum:
    et2 = _etilde2(p)
    mid = 0.5 * p.trace
    return Spectrum(e1=mid - et2, e2=mid + et2, etilde2=et2)


def eigenstate_at(p: ModelParams, t: float, which: int) -> np.ndarray:
    """Instantaneous eigenvector ``|phi_which; t>`` in the bare basis."""
    f = polar_decomposition(p)
    ph = np.exp(1j * (p.omega * t - p.phi0))
    if which == 1:
        return np.array([-f.sin_half, f.cos_half * ph], dtype=complex)
    if which == 2:
        return np.array([f.cos_half, f.sin_half * ph], dtype=complex)
    raise ValueError(f"which must be 1 or 2, got {which!r}")


def eigenbasis(p: ModelParams, t, field: EffectiveField | None = None) -> np.ndarray:
    """Unitary whose columns are ``|phi_1; t>`` and ``|phi_2; t>``.

    ``t`` may be an array, in which case the result has shape ``(..., 2, 2)``.
    """
    f = field or polar_decomposition(p)
    ph = np.exp(1j * _drive_angle(p, t))
    u = np.empty(np.shape(ph) + (2, 2), dtype=complex)
    u[..., 0, 0] = -f.sin_half
    u[..., 1, 0] = f.cos_half * ph
    u[..., 0, 1] = f.cos_half
    u[..., 1, 1] = f.sin_half * ph
    return u


def rabi(p: ModelParams) -> RabiData:
    gamma = math.hypot(p.d0, 0.5 * (p.delta_eps + p.omega))
    return RabiData(gamma=gamma, t_field=TWO_PI / p.omega, t_rabi=TWO_PI / gamma)


def rabi_from_field(p: ModelParams) -> float:
    """Rabi frequency from the field norm and tilt, 0.5*|(B - w cos, w sin)|."""
    f = polar_decomposition(p)
    return 0.5 * math.hypot(f.b_norm - p.omega * f.cos_theta, p.omega * f.sin_theta)
