"""Exact dynamics and Aharonov-Anandan phases of the driven two-level model (RWA)."""

from .errors import (
    AAPhaseError,
    ConstraintMismatchError,
    DegenerateNullspaceError,
    FormulaMismatchError,
    IntegrationError,
    NoSolutionError,
    NotCyclicError,
)
from .model import (
    EffectiveField,
    ModelParams,
    RabiData,
    Spectrum,
    dipole_coupling,
    effective_field_at,
    eigenstate_at,
    hamiltonian_at,
    polar_decomposition,
    rabi,
    spectrum,
)
from .propagator import (
    AmplitudeState,
    InitialState,
    basis_change,
    evolve_closed,
    evolve_numeric,
    g_periodicity_check,
)
from .phases import (
    Branch,
    CyclicSolution,
    PhaseRecord,
    aa_phase_numeric,
    case_generic_T,
    case_half_integer_m,
    case_integer_n,
    commensurate,
    det_M,
    det_Mtilde,
    detect_cyclic,
    dynamical_phase,
    mean_energy,
    rabi_cycle_n1,
    rabi_cycle_special,
)
from .regimes import (
    Form,
    RegimeQuery,
    adiabatic_berry_scan,
    coupling_for_half_integer,
    coupling_for_integer,
    coupling_for_rabi_period,
)

__version__ = "0.1.0"
