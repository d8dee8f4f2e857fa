"""Cyclic evolutions, global/dynamical phases and the Aharonov-Anandan phase.

A state is cyclic over ``tau`` when ``|psi(tau)> = exp(i phi) |psi(0)>``.
The Aharonov-Anandan phase is then ``beta = phi + int_0^tau <H> dt``.

Two routes are provided for every case:

* closed formulas for phi and beta on each branch (``case_*``,
  ``rabi_cycle_*``, ``commensurate``), and
* :func:`aa_phase_numeric`, which extracts phi from the overlap
  ``<psi(0)|psi(tau)>`` and integrates the directly evaluated energy
  expectation by adaptive quadrature.

Phases are kept unwrapped as computed; compare them with :func:`wrap`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConstraintMismatchError,
    DegenerateNullspaceError,
    FormulaMismatchError,
    NoSolutionError,
    NotCyclicError,
)
from .model import (
    TWO_PI,
    ModelParams,
    hamiltonian_at,
    polar_decomposition,
    rabi,
    spectrum,
)
from .propagator import InitialState, bare_trajectory, evolve_closed

CYCLIC_TOL = 1e-9
ORDER_TOL = 1e-10
IDENTITY_TOL = 1e-10
GENERIC_GUARD = 1e-8
NULL_SV_TOL = 1e-9


class Branch(str, Enum):
    INTEGER_N = "integer-n"
    HALF_INTEGER_M = "half-integer-m"
    GENERIC_T_PLUS = "generic-T-plus"
    GENERIC_T_MINUS = "generic-T-minus"
    RABI_N1 = "rabi-n1"
    RABI_GAMMA0 = "rabi-gamma0"
    RABI_GAMMA_OMEGA = "rabi-gamma-omega"
    COMMENSURATE = "commensurate"
    NUMERIC = "numeric"


def wrap(x):
    """Reduce an angle to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    y = np.where(y == -math.pi, math.pi, y)
    return float(y) if np.ndim(y) == 0 else y


def phase_distance(a, b) -> float:
    """|a - b| modulo 2 pi."""
    return abs(wrap(a - b))


@dataclass(frozen=True)
class CyclicSolution:
    tau: float
    s0: InitialState
    phi: float
    fidelity_defect: float

    @property
    def phi_principal(self) -> float:
        return wrap(self.phi)


@dataclass(frozen=True)
class PhaseRecord:
    """Global, dynamical and Aharonov-Anandan phases of one cyclic evolution.

    ``gamma_aux`` is the branch's auxiliary phase: ``phi + (eps1+eps2) tau/2``
    on the drive-period branches, ``phi + (eps1+eps2+w) tau/2`` on the
    Rabi-period branches and the numeric one.
    """

    phi: float
    dyn: float
    beta: float
    branch: Branch
    gamma_aux: float
    tau: float
    s0: InitialState

    @property
    def closure(self) -> float:
        """beta - (phi + dyn), unwrapped."""
        return self.beta - (self.phi + self.dyn)

    @property
    def beta_principal(self) -> float:
        return wrap(self.beta)


# --- energy expectation and dynamical phase ----------------------------------


def _state_terms(s0: InitialState):
    """Population difference and the delta1-referenced c2 used by every formula."""
    a1 = abs(s0.c1_0)
    x = s0.c2_0 * cmath.exp(-1j * s0.delta1)
    pop = abs(s0.c2_0) ** 2 - a1 ** 2
    return pop, a1, x


def mean_energy(p: ModelParams, s0: InitialState, t):
    """Closed-form ``<psi(t)|H(t)|psi(t)>``; ``t`` may be an array."""
    f = polar_decomposition(p)
    gamma = rabi(p).gamma
    et2 = spectrum(p).etilde2
    pop, a1, x = _state_terms(s0)
    t = np.asarray(t, dtype=float)
    k = p.omega / gamma
    root = math.sqrt(1.0 - 0.25 * k * k * f.sin_theta ** 2)
    sin_term = -k * f.sin_theta * a1 * x.imag  # (i/2) k sin(theta) |c1| (X - X*)
    sq_term = -0.5 * k * k * pop * f.sin_theta ** 2 + k * f.sin_theta * root * a1 * 2 * x.real
    val = 0.5 * p.trace + et2 * (pop + sin_term * np.sin(2 * gamma * t) + sq_term * np.sin(gamma * t) ** 2)
    return float(val) if val.ndim == 0 else val


def mean_energy_direct(p: ModelParams, s0: InitialState, t: float) -> float:
    """Energy expectation from the propagated state and the Hamiltonian matrix."""
    psi = evolve_closed(p, s0, t).bare(p)
    return float(np.vdot(psi, hamiltonian_at(p, t) @ psi).real)


def dynamical_phase(p: ModelParams, s0: InitialState, tau: float) -> float:
    """``int_0^tau <H> dt`` from the antiderivative of :func:`mean_energy`."""
    f = polar_decomposition(p)
    gamma = rabi(p).gamma
    et2 = spectrum(p).etilde2
    pop, a1, x = _state_terms(s0)
    k = p.omega / gamma
    root = math.sqrt(1.0 - 0.25 * k * k * f.sin_theta ** 2)
    sin_term = -k * f.sin_theta * a1 * x.imag
    sq_term = -0.5 * k * k * pop * f.sin_theta ** 2 + k * f.sin_theta * root * a1 * 2 * x.real
    int_sin2 = 0.5 * tau - math.sin(2 * gamma * tau) / (4 * gamma)
    int_sin = (1.0 - math.cos(2 * gamma * tau)) / (2 * gamma)
    return 0.5 * p.trace * tau + et2 * (pop * tau + sin_term * int_sin + sq_term * int_sin2)


def _quad(fn, tau: float, gamma: float, omega: float) -> float:
    # split at the faster of the two oscillation scales so each piece is smooth
    pieces = max(1, int(math.ceil(tau * max(gamma, omega) / math.pi)))
    edges = np.linspace(0.0, tau, pieces + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += quad(fn, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return total


def dynamical_phase_quad(p: ModelParams, s0: InitialState, tau: float) -> float:
    """Adaptive quadrature of :func:`mean_energy` (cross-check of the antiderivative)."""
    return _quad(lambda t: mean_energy(p, s0, t), tau, rabi(p).gamma, p.omega)


def dynamical_phase_direct(p: ModelParams, s0: InitialState, tau: float) -> float:
    """Adaptive quadrature of the energy expectation of the propagated state."""
    return _quad(lambda t: mean_energy_direct(p, s0, t), tau, rabi(p).gamma, p.omega)


# --- cyclicity ---------------------------------------------------------------


def overlap(p: ModelParams, s0: InitialState, tau: float) -> complex:
    """``<psi(0)|psi(tau)>`` with both states in the bare basis."""
    psi = bare_trajectory(p, s0, [0.0, tau])
    return complex(np.vdot(psi[0], psi[1]))


def detect_cyclic(p: ModelParams, s0: InitialState, tau: float,
                  tol: float = CYCLIC_TOL) -> Optional[CyclicSolution]:
    """Certify that ``s0`` returns to itself at ``tau``; None if it does not."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    z = overlap(p, s0, tau)
    defect = 1.0 - abs(z)
    if defect > tol:
        return None
    return CyclicSolution(tau=float(tau), s0=s0, phi=cmath.phase(z), fidelity_defect=max(defect, 0.0))


def _require_cyclic(p, s0, tau, tol=CYCLIC_TOL) -> CyclicSolution:
    sol = detect_cyclic(p, s0, tau, tol)
    if sol is None:
        defect = 1.0 - abs(overlap(p, s0, tau))
        raise NotCyclicError(f"state is not cyclic at tau={tau:.17g} (fidelity defect {defect:.3g})", defect)
    return sol


def aa_phase_numeric(p: ModelParams, s0: InitialState, tau: float, tol: float = CYCLIC_TOL) -> PhaseRecord:
    """Reference pipeline: overlap phase plus quadrature of the direct energy."""
    sol = _require_cyclic(p, s0, tau, tol)
    dyn = dynamical_phase_direct(p, s0, tau)
    return PhaseRecord(
        phi=sol.phi,
        dyn=dyn,
        beta=sol.phi + dyn,
        branch=Branch.NUMERIC,
        gamma_aux=sol.phi + 0.5 * (p.trace + p.omega) * tau,
        tau=float(tau),
        s0=s0,
    )


# --- drive-period branches ---------------------------------------------------


def _check_order(p: ModelParams, order: float) -> None:
    gamma = rabi(p).gamma
    if abs(gamma - order * p.omega) > ORDER_TOL * p.omega:
        raise ConstraintMismatchError(
            f"need Gamma = {order:g} omega, got Gamma/omega = {gamma / p.omega:.15g}", gamma / p.omega)


def _is_half_odd(m: float) -> bool:
    return m > 0 and abs(2 * m - round(2 * m)) < 1e-12 and round(2 * m) % 2 == 1


def _population_cross(p: ModelParams, s0: InitialState, k: float) -> float:
    """(|c2|^2 - |c1|^2)(1 - k^2 sin^2) + k sin sqrt(1 - k^2 sin^2) |c1| 2 Re(c2 e^{-i delta1})."""
    f = polar_decomposition(p)
    pop, a1, x = _state_terms(s0)
    ks = k * f.sin_theta
    return pop * (1.0 - ks * ks) + ks * math.sqrt(1.0 - ks * ks) * a1 * 2.0 * x.real


def beta_integer_formula(p: ModelParams, order: float, s0: InitialState) -> float:
    """AA phase for Gamma = n omega at tau = T. Evaluated for any ``order``."""
    f = polar_decomposition(p)
    return -math.pi - math.pi / f.cos_theta * (p.delta_eps / p.omega) * _population_cross(p, s0, 0.5 / order)


def beta_half_integer_formula(p: ModelParams, order: float, s0: InitialState) -> float:
    """AA phase for Gamma = m omega (m half-odd) at tau = T; the integer form shifted by pi."""
    f = polar_decomposition(p)
    return -math.pi / f.cos_theta * (p.delta_eps / p.omega) * _population_cross(p, s0, 0.5 / order)


def case_integer_n(p: ModelParams, n: int, s0: InitialState) -> PhaseRecord:
    """Every state is cyclic at T when Gamma = n omega; phi = -pi - (eps1+eps2) T/2."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    _check_order(p, n)
    tau = p.period
    phi = -math.pi - 0.5 * p.trace * tau
    return PhaseRecord(
        phi=phi,
        dyn=dynamical_phase(p, s0, tau),
        beta=beta_integer_formula(p, n, s0),
        branch=Branch.INTEGER_N,
        gamma_aux=-math.pi,
        tau=tau,
        s0=s0,
    )


def case_half_integer_m(p: ModelParams, m: float, s0: InitialState) -> PhaseRecord:
    """Every state is cyclic at T when Gamma = m omega; phi = -(eps1+eps2) T/2."""
    if not _is_half_odd(m):
        raise ValueError(f"m must be a half-odd integer (1/2, 3/2, ...), got {m!r}")
    _check_order(p, m)
    tau = p.period
    return PhaseRecord(
        phi=-0.5 * p.trace * tau,
        dyn=dynamical_phase(p, s0, tau),
        beta=beta_half_integer_formula(p, m, s0),
        branch=Branch.HALF_INTEGER_M,
        gamma_aux=0.0,
        tau=tau,
        s0=s0,
    )


def matrix_M(p: ModelParams, gamma: float) -> np.ndarray:
    """Cyclicity matrix at tau = T; ``M @ c(0) = 0`` for cyclic states with phase gamma."""
    g = rabi(p).gamma
    et2 = spectrum(p).etilde2
    gt = g * p.period
    diag = g * et2 * (math.cos(gt) + cmath.exp(1j * gamma))
    shift = 1j * math.sin(gt) * (et2 ** 2 + 0.25 * p.omega * p.delta_eps)
    off = -0.5j * p.omega * p.d0 * math.sin(gt)
    return np.array([[diag + shift, off], [off, diag - shift]])


def det_M(p: ModelParams, gamma: float) -> complex:
    """Closed-form determinant of :func:`matrix_M`, checked against the matrix."""
    g = rabi(p).gamma
    et2 = spectrum(p).etilde2
    e = cmath.exp(1j * gamma)
    scale = (g * et2) ** 2
    det = scale * (1.0 + 2.0 * math.cos(g * p.period) * e + e * e)
    m = matrix_M(p, gamma)
    direct = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(direct - det) > IDENTITY_TOL * scale:
        raise FormulaMismatchError(f"det M closed form {det} != matrix determinant {direct}")
    return det


def generic_T_state(p: ModelParams, sign: int, delta1: float = 0.0) -> InitialState:
    """The state cyclic at T with gamma = pi + sign * Gamma T."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    g = rabi(p).gamma
    et2 = spectrum(p).etilde2
    a = et2 * (et2 - sign * g) + 0.25 * p.omega * p.delta_eps
    norm = math.sqrt((p.omega * p.d0) ** 2 + 4.0 * a * a)
    if norm < 1e-300:
        raise DegenerateNullspaceError("generic-T state undefined (decoupled system)")
    u = cmath.exp(1j * delta1)
    return InitialState(p.omega * p.d0 * u / norm, 2.0 * a * u / norm)


def beta_generic_formula(p: ModelParams, sign: int, s0: InitialState) -> float:
    f = polar_decomposition(p)
    g = rabi(p).gamma
    w = p.omega
    gt = g * p.period
    pop, a1, x = _state_terms(s0)
    r = (w / (2 * g)) ** 2 * f.sin_theta ** 2
    s2 = math.sin(2 * gt)
    bracket = (pop * (1.0 - r * (1.0 - w / (4 * math.pi * g) * s2))
               + w / g * (0.5 - w / (8 * math.pi * g) * s2) * f.sin_theta * math.sqrt(1.0 - r) * a1 * 2.0 * x.real)
    return math.pi + sign * gt - math.pi / f.cos_theta * (p.delta_eps / w) * bracket


def case_generic_T(p: ModelParams, sign: int, delta1: float = 0.0) -> tuple[CyclicSolution, PhaseRecord]:
    """Special states cyclic at T when Gamma/omega is not a multiple of 1/2.

    The phase ``gamma = phi + (eps1+eps2) T/2`` must be ``pi +- Gamma T``; the
    corresponding null vector of M is built in closed form with
    ``c1(0) = |c1(0)| e^{i delta1}``.
    """
    ratio = rabi(p).gamma / p.omega
    if abs(2 * ratio - round(2 * ratio)) <= 2 * GENERIC_GUARD:
        raise ConstraintMismatchError(
            f"Gamma/omega = {ratio:.15g} is a multiple of 1/2; use the integer or half-integer branch", ratio)
    s0 = generic_T_state(p, sign, delta1)
    tau = p.period
    gamma = math.pi + sign * rabi(p).gamma * tau
    g = rabi(p).gamma
    scale = (g * spectrum(p).etilde2) ** 2
    if abs(det_M(p, gamma)) > IDENTITY_TOL * scale:
        raise FormulaMismatchError("det M does not vanish at pi +- Gamma T")
    residual = np.abs(matrix_M(p, gamma) @ s0.vector).max()
    if residual > IDENTITY_TOL * math.sqrt(scale) * 10:
        raise FormulaMismatchError(f"generic-T state is not a null vector of M (residual {residual:.3g})")
    sol = _require_cyclic(p, s0, tau)
    phi = gamma - 0.5 * p.trace * tau
    record = PhaseRecord(
        phi=phi,
        dyn=dynamical_phase(p, s0, tau),
        beta=beta_generic_formula(p, sign, s0),
        branch=Branch.GENERIC_T_PLUS if sign > 0 else Branch.GENERIC_T_MINUS,
        gamma_aux=gamma,
        tau=tau,
        s0=s0,
    )
    return sol, record


def commensurate_coupling(p: ModelParams, m: int, n: int) -> float:
    """D0 that makes Gamma/omega = m/(2n) at fixed level splitting and omega."""
    d2 = (m * p.omega / (2 * n)) ** 2 - 0.25 * (p.delta_eps + p.omega) ** 2
    if d2 < 0:
        raise NoSolutionError(f"Gamma/omega = {m}/(2*{n}) needs D0^2 = {d2:.6g} < 0", d2)
    return math.sqrt(d2)


def commensurate_phi(p: ModelParams, m: int, n: int) -> float:
    return -0.5 * p.trace * n * p.period + math.pi * (m - n)


def _check_commensurate(p: ModelParams, m: int, n: int) -> None:
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ValueError("m and n must be positive integers")
    ratio = rabi(p).gamma / p.omega
    if abs(ratio - m / (2 * n)) > ORDER_TOL:
        raise ConstraintMismatchError(f"need Gamma/omega = {m}/{2 * n}, got {ratio:.15g}", ratio)


def commensurate(p: ModelParams, m: int, n: int, s0: InitialState) -> tuple[CyclicSolution, float]:
    """Cyclic return of any state at tau = nT when Gamma/omega = m/(2n).

    Returns the certified solution for ``s0`` and the closed-form phase
    ``-(eps1+eps2) nT/2 + pi (m - n)``.
    """
    _check_commensurate(p, m, n)
    return _require_cyclic(p, s0, n * p.period), commensurate_phi(p, m, n)


def commensurate_record(p: ModelParams, m: int, n: int, s0: InitialState) -> PhaseRecord:
    _check_commensurate(p, m, n)
    tau = n * p.period
    phi = commensurate_phi(p, m, n)
    dyn = dynamical_phase(p, s0, tau)
    return PhaseRecord(phi=phi, dyn=dyn, beta=phi + dyn, branch=Branch.COMMENSURATE,
                       gamma_aux=math.pi * (m - n), tau=tau, s0=s0)


# --- arbitrary tau and the Rabi period ---------------------------------------


def matrix_Mtilde(p: ModelParams, gamma_tilde: float, tau: float) -> np.ndarray:
    """Cyclicity matrix for general ``tau``.

    Rows are the bare-basis components of ``psi(tau) - e^{i phi} psi(0)``
    (up to a common factor); columns act on the eigenbasis coefficients.
    """
    f = polar_decomposition(p)
    g = rabi(p).gamma
    et2 = spectrum(p).etilde2
    c, s = f.cos_half, f.sin_half
    cg, sg = math.cos(g * tau), math.sin(g * tau) / g
    a = et2 - 0.5 * p.omega * f.cos_theta
    b = 0.5 * p.omega * f.sin_theta
    e = cmath.exp(1j * gamma_tilde)
    e2 = cmath.exp(1j * (gamma_tilde - p.omega * tau))
    u = -s * a - b * c
    v = c * a - b * s
    return np.array([
        [s * (e - cg) + 1j * sg * u, -c * (e - cg) - 1j * sg * v],
        [c * (cg - e2) + 1j * sg * v, s * (cg - e2) + 1j * sg * u],
    ])


def det_Mtilde_factored(p: ModelParams, gamma_prime: float) -> complex:
    """det of the cyclicity matrix at tau = T_Gamma in product form."""
    wt = p.omega * rabi(p).t_rabi
    re = -math.sin(0.5 * gamma_prime) + math.sin(1.5 * gamma_prime - wt)
    im = 2.0 * math.sin(0.5 * (gamma_prime - wt)) * math.sin(gamma_prime - 0.5 * wt)
    return 2.0 * math.sin(0.5 * gamma_prime) * complex(re, im)


def det_Mtilde(p: ModelParams, gamma_tilde: float, tau: float) -> complex:
    """Closed-form det of :func:`matrix_Mtilde`, cross-checked against the matrix.

    When ``tau`` is the Rabi period the product form of
    :func:`det_Mtilde_factored` is checked as well.
    """
    g = rabi(p).gamma
    e = cmath.exp(1j * gamma_tilde)
    e2 = cmath.exp(1j * (gamma_tilde - p.omega * tau))
    cg = math.cos(g * tau)
    det = (-1.0 + (cg * (e + e2) - e * e2)
           - 0.5j * math.sin(g * tau) / g * (p.omega + p.delta_eps) * (e - e2))
    m = matrix_Mtilde(p, gamma_tilde, tau)
    direct = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = max(1.0, float(np.abs(m).max()) ** 2)
    if abs(direct - det) > IDENTITY_TOL * scale:
        raise FormulaMismatchError(f"det Mtilde closed form {det} != matrix determinant {direct}")
    t_rabi = rabi(p).t_rabi
    if abs(tau - t_rabi) <= 1e-12 * t_rabi:
        fac = det_Mtilde_factored(p, gamma_tilde)
        if abs(fac - det) > IDENTITY_TOL * scale:
            raise FormulaMismatchError(f"factored det Mtilde {fac} != {det}")
    return det


def null_vector(m: np.ndarray) -> np.ndarray:
    """Unit null direction of a singular 2x2 matrix.

    Uses the adjugate column of larger norm, falling back to the right
    singular vector of the smallest singular value. The phase is fixed so
    the first component is real and non-negative (the second one if the
    first vanishes).

    Raises
    ------
    DegenerateNullspaceError
        If both singular values are below ``NULL_SV_TOL``.
    """
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] < NULL_SV_TOL:
        raise DegenerateNullspaceError(
            f"both singular values below {NULL_SV_TOL:g} ({sv[0]:.3g}, {sv[1]:.3g}); state not unique")
    cols = [np.array([m[1, 1], -m[1, 0]]), np.array([-m[0, 1], m[0, 0]])]
    v = max(cols, key=np.linalg.norm)
    if np.linalg.norm(v) < 1e-12:
        v = np.linalg.svd(m)[2][-1].conj()
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) > 1e-15 else 1
    v = v * (abs(v[k]) / v[k])
    v[k] = abs(v[k])  # drop the rounding residue in the imaginary part
    return v


def beta_rabi_n1_formula(p: ModelParams, s0: InitialState) -> float:
    f = polar_decomposition(p)
    return -math.pi - math.pi / f.cos_theta * (p.delta_eps / p.omega) * _population_cross(p, s0, 0.5)


def beta_rabi_formula(p: ModelParams, s0: InitialState, branch: Branch) -> float:
    """AA phase at tau = T_Gamma for the gamma' = 0 or gamma' = w T_Gamma roots."""
    f = polar_decomposition(p)
    g = rabi(p).gamma
    k = p.omega / g
    lead = -math.pi * k if branch is Branch.RABI_GAMMA0 else math.pi * k
    return lead - math.pi / f.cos_theta * k * (p.delta_eps / p.omega) * _population_cross(p, s0, 0.5 * k)


def rabi_cycle_n1(p: ModelParams, s0: InitialState) -> PhaseRecord:
    """Every state is cyclic at T_Gamma = T when Gamma = omega."""
    _check_order(p, 1)
    tau = rabi(p).t_rabi
    phi = -0.5 * p.trace * tau - math.pi
    return PhaseRecord(
        phi=phi,
        dyn=dynamical_phase(p, s0, tau),
        beta=beta_rabi_n1_formula(p, s0),
        branch=Branch.RABI_N1,
        gamma_aux=phi + 0.5 * (p.trace + p.omega) * tau,
        tau=tau,
        s0=s0,
    )


def rabi_cycle_special(p: ModelParams, branch: Branch | str) -> tuple[CyclicSolution, PhaseRecord]:
    """The state cyclic at the Rabi period for gamma' = 0 or gamma' = w T_Gamma.

    gamma' is ``phi + (eps1+eps2+w) T_Gamma/2``. The initial state is the
    null vector of the cyclicity matrix at that root, with delta1 = 0.
    """
    branch = Branch(branch)
    if branch not in (Branch.RABI_GAMMA0, Branch.RABI_GAMMA_OMEGA):
        raise ValueError(f"branch must be rabi-gamma0 or rabi-gamma-omega, got {branch.value}")
    tau = rabi(p).t_rabi
    gp = 0.0 if branch is Branch.RABI_GAMMA0 else p.omega * tau
    m = matrix_Mtilde(p, gp, tau)
    v = null_vector(m)
    s0 = InitialState.normalized(v[0], v[1])
    sol = _require_cyclic(p, s0, tau)
    phi = gp - 0.5 * (p.trace + p.omega) * tau
    record = PhaseRecord(
        phi=phi,
        dyn=dynamical_phase(p, s0, tau),
        beta=beta_rabi_formula(p, s0, branch),
        branch=branch,
        gamma_aux=gp,
        tau=tau,
        s0=s0,
    )
    return sol, record


__all__ = [
    "Branch", "CyclicSolution", "PhaseRecord", "wrap", "phase_distance",
    "mean_energy", "mean_energy_direct", "dynamical_phase", "dynamical_phase_quad",
    "dynamical_phase_direct", "overlap", "detect_cyclic", "aa_phase_numeric",
    "beta_integer_formula", "beta_half_integer_formula", "case_integer_n", "case_half_integer_m",
    "matrix_M", "det_M", "generic_T_state", "beta_generic_formula", "case_generic_T",
    "commensurate", "commensurate_coupling", "commensurate_phi", "commensurate_record",
    "matrix_Mtilde", "det_Mtilde", "det_Mtilde_factored", "null_vector",
    "beta_rabi_n1_formula", "beta_rabi_formula", "rabi_cycle_n1", "rabi_cycle_special",
]
