"""Coupling constraints for the special Rabi-frequency ratios, and the adiabatic scan.

Each solver returns the coupling ``D0`` that puts a parameter point on a
resonance locus, either exactly or to first order in the detuning
``delta = omega - delta_eps``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import NoSolutionError
from .model import ModelParams, polar_decomposition
from .phases import case_integer_n, wrap
from .propagator import InitialState


class Form(str, Enum):
    EXACT = "exact"
    FIRST_ORDER = "first-order"


FIRST_ORDER_MAX = 0.1
FIRST_ORDER_WARN = 0.01


@dataclass(frozen=True)
class RegimeQuery:
    """Level splitting, detuning, resonance order and expansion form."""

    delta_eps: float
    delta: float
    order: float
    form: Form = Form.EXACT

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        if not self.delta_eps > 0:
            raise ValueError("delta_eps must be positive")
        if not self.omega > 0:
            raise ValueError(f"omega = delta_eps + delta must be positive, got {self.omega}")
        if not self.order > 0:
            raise ValueError("order must be positive")
        if self.form is Form.FIRST_ORDER:
            x = abs(self.delta / self.delta_eps)
            if x > FIRST_ORDER_MAX:
                raise ValueError(f"first-order form needs |delta/delta_eps| <= {FIRST_ORDER_MAX}, got {x:g}")
            if x > FIRST_ORDER_WARN:
                warnings.warn(f"|delta/delta_eps| = {x:g} is not small; first-order form may be inaccurate",
                              stacklevel=3)

    @classmethod
    def from_omega(cls, delta_eps, omega, order, form=Form.EXACT) -> "RegimeQuery":
        return cls(delta_eps, omega - delta_eps, order, form)

    @property
    def omega(self) -> float:
        return self.delta_eps + self.delta

    @property
    def x(self) -> float:
        return self.delta / self.delta_eps

    def params(self, d0: float, eps1: float = 0.0, phi0: float = 0.0) -> ModelParams:
        return ModelParams(eps1=eps1, eps2=eps1 + self.delta_eps, d0=d0, omega=self.omega, phi0=phi0)


def _sqrt_or_raise(d2: float, what: str) -> float:
    if d2 < 0:
        raise NoSolutionError(f"{what} has no solution: requires D0^2 = {d2:.6g} < 0", d2)
    return math.sqrt(d2)


def _resonance_d0(q: RegimeQuery, ratio: float, what: str) -> float:
    """D0 with Gamma = ratio * omega."""
    if q.form is Form.EXACT:
        d2 = (ratio * q.omega) ** 2 - 0.25 * (q.delta_eps + q.omega) ** 2
    else:
        r2 = ratio * ratio
        d2 = q.delta_eps ** 2 * ((r2 - 1.0) + (2.0 * r2 - 1.0) * q.x)
    return _sqrt_or_raise(d2, what)


def coupling_for_integer(q: RegimeQuery) -> float:
    """D0 making Gamma = n omega."""
    n = q.order
    if int(n) != n or n < 1:
        raise ValueError(f"order must be a positive integer, got {n!r}")
    return _resonance_d0(q, n, f"Gamma = {int(n)} omega")


def coupling_for_half_integer(q: RegimeQuery) -> float:
    """D0 making Gamma = m omega, m in {1/2, 3/2, ...}."""
    m = Fraction(q.order).limit_denominator(8)
    if abs(float(m) - q.order) > 1e-12 or m.denominator != 2:
        raise ValueError(f"order must be a half-odd integer, got {q.order!r}")
    return _resonance_d0(q, float(m), f"Gamma = {m} omega")


def coupling_for_rabi_period(q: RegimeQuery) -> float:
    """D0 making T_Gamma = n T, i.e. Gamma = omega / n."""
    n = q.order
    if int(n) != n or n < 1:
        raise ValueError(f"order must be a positive integer, got {n!r}")
    return _resonance_d0(q, 1.0 / n, f"T_Gamma = {int(n)} T")


# --- adiabatic limit ---------------------------------------------------------


@dataclass(frozen=True)
class BerryScanRow:
    n: int
    omega: float
    theta: float
    beta_ground: float
    beta_excited: float
    dev_ground: float
    dev_excited: float


def resonant_omega(delta_eps: float, d0: float, n: int) -> float:
    """Positive root of n^2 w^2 = D0^2 + (delta_eps + w)^2 / 4."""
    a = n * n - 0.25
    b = -0.5 * delta_eps
    c = -(d0 * d0 + 0.25 * delta_eps ** 2)
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def berry_targets(theta: float) -> tuple[float, float]:
    """Adiabatic-limit phases of the lower and upper instantaneous eigenstates."""
    return -math.pi * (1 + math.cos(theta)), -math.pi * (1 - math.cos(theta))


def adiabatic_berry_scan(delta_eps: float, d0_over_eps: float, n_list) -> list[BerryScanRow]:
    """AA phase of the two eigenstates along Gamma = n omega as n grows.

    For every ``n`` the drive frequency is chosen on the Gamma = n omega
    locus; the resulting AA phases (mod 2 pi) approach the Berry phases
    ``-pi (1 +- cos theta)`` with an O(1/n) deviation.
    """
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])) or (ns and ns[0] < 1):
        raise ValueError("n_list must be strictly increasing positive integers")
    d0 = d0_over_eps * delta_eps
    ground, excited = InitialState(1, 0), InitialState(0, 1)
    rows = []
    for n in ns:
        w = resonant_omega(delta_eps, d0, n)
        if not w < delta_eps / 5:
            raise ValueError(f"n={n} gives omega={w:.4g} >= delta_eps/5; not in the adiabatic regime")
        p = ModelParams(eps1=0.0, eps2=delta_eps, d0=d0, omega=w)
        theta = polar_decomposition(p).theta
        t_g, t_e = berry_targets(theta)
        b_g = case_integer_n(p, n, ground).beta
        b_e = case_integer_n(p, n, excited).beta
        rows.append(BerryScanRow(
            n=n, omega=w, theta=theta,
            beta_ground=wrap(b_g), beta_excited=wrap(b_e),
            dev_ground=abs(wrap(b_g - t_g)), dev_excited=abs(wrap(b_e - t_e)),
        ))
    return rows
