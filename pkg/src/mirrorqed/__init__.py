"""Reflection spectroscopy of a strongly driven transmon on a waveguide."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceFailure,
    DegenerateSteadyState,
    DimensionMismatch,
    LinearityViolation,
    MirrorqedError,
    ResolventSingular,
    TransmonRegimeError,
)
from .model import (
    DeviceParams,
    PumpFrameModel,
    build_pump_frame_model,
    default_device,
    ej_of_flux,
    ladder,
    omega10,
    transition_frequency,
)
from .lindblad import (
    build_liouvillian,
    dissipator,
    hamiltonian,
    propagate,
    steady_state,
)
from .response import (
    ReflectionSpectrum,
    gain_bands,
    phase_averaged_reflection,
    spectrum,
    susceptibility,
)
from .oracle import OracleConfig, calibration_constant, two_tone_reflection
from .sweep import (
    CalibrationResult,
    Overlays,
    SweepGrid,
    SweepResult,
    calibrate_k,
    dbm_to_rabi,
    overlays_for,
    run_grid,
)

__all__ = [
    "__version__",
    "MirrorqedError",
    "TransmonRegimeError",
    "DimensionMismatch",
    "DegenerateSteadyState",
    "ResolventSingular",
    "LinearityViolation",
    "ConvergenceFailure",
    "DeviceParams",
    "PumpFrameModel",
    "default_device",
    "ej_of_flux",
    "omega10",
    "ladder",
    "transition_frequency",
    "build_pump_frame_model",
    "hamiltonian",
    "dissipator",
    "build_liouvillian",
    "steady_state",
    "propagate",
    "ReflectionSpectrum",
    "susceptibility",
    "phase_averaged_reflection",
    "spectrum",
    "gain_bands",
    "OracleConfig",
    "calibration_constant",
    "two_tone_reflection",
    "Overlays",
    "overlays_for",
    "dbm_to_rabi",
    "SweepGrid",
    "SweepResult",
    "run_grid",
    "CalibrationResult",
    "calibrate_k",
]
