"""Adiabatic phase gap for a spin-half in a rotating field.

The predicted adiabatic phase (dynamical plus geometric) is compared with the
phase of the exact evolution; for the rotating-field model the difference
grows linearly in time and is not removed by slowing the field down.
"""

from .conditions import (
    ConditionReport,
    PairCondition,
    ResidualTrace,
    model_traditional_report,
    modified_report,
    residual_envelope,
    residual_integrand,
    residual_trace,
    resolve_prefactor,
    traditional_report,
)
from .errors import (
    AccuracyError,
    AdiaphaseError,
    AlignmentError,
    DegeneracyError,
    DimensionError,
    GaugeError,
    HermiticityError,
    InsufficientSamplesError,
    NotAdiabaticError,
    NumericalError,
    ParameterError,
    RuntimeGuardError,
    StabilityError,
    TrackingAmbiguityError,
    UndersampledError,
    UnreliableDerivativeError,
    UnsupportedModelError,
    UnsupportedSizeError,
)
from .evolution import (
    EigenbasisCoefficients,
    EvolutionRecord,
    IntegratorSpec,
    decompose,
    evolve,
    reconstruct,
)
from .experiments import ExperimentConfig, Table, render_csv
from .hamiltonian import (
    REFERENCE_PARAMS,
    DerivedFrequencies,
    HamiltonianTrajectory,
    OracleCoefficients,
    RotatingFieldParams,
    analytic_eigensystem,
    derived_frequencies,
    linear_trajectory,
    oracle_coefficients,
    oracle_gap,
    oracle_state,
    oracle_superposition_state,
    oracle_total_phase,
    rotating_field,
)
from .numerics import cumquad_uniform, eigh, inner, quad_uniform
from .phase import (
    LinearityResult,
    PhaseLedger,
    actual_phase,
    asymptotic_gap_slope,
    fitted_gap_slope,
    gap_ledger,
    linearity_experiment,
    phase_gap,
    phase_ledger,
    predicted_phase,
)
from .spectral import (
    SpectralFrame,
    SpectralFrameSequence,
    connection_integral,
    coupling_diag,
    coupling_offdiag,
    energy_integral,
    track_frames,
)

__version__ = "0.1.0"
