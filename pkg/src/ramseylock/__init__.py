"""Two-level-spin pulse-sequence simulator and phase-encryption toolkit.

The package simulates the write/scramble/retrieve protocol family on a
single two-level spin: exact 2x2 unitary dynamics (:mod:`.spinor`),
timeline composition (:mod:`.sequence`), key material and timing planners
(:mod:`.protocol`), laboratory noise models (:mod:`.noise`),
damped-sinusoid data reduction (:mod:`.analysis`) and a CSV-emitting
command line (:mod:`.cli`).
"""

from .analysis import FitResult, fit_damped_sinusoid, fringe_visibility, phase_spread
from .config import ExperimentConfig, parse_config, serialize_config
from .errors import (
    ConfigError,
    DegradedStateError,
    FitError,
    InfeasiblePlanError,
    InvalidDurationError,
    InvalidFieldError,
    NoFringeError,
    NoPrecessionError,
    PlanMismatchError,
    PlannerError,
    RamseyLockError,
    SequenceError,
)
from .noise import (
    MonteCarloResult,
    NoiseModel,
    apply_contrast_decay,
    monte_carlo_scramble,
    sample_phase_increment,
    sample_relative_phase,
    simulate_measurement,
)
from .protocol import (
    DoubleRetrievalPlan,
    RetrievalPlan,
    ScrambleKey,
    WriteKey,
    build_double_retrieved,
    build_double_scrambled,
    build_retrieved,
    build_scrambled,
    build_write_read,
    plan_double_retrieval,
    plan_readout,
    plan_retrieval,
    secret_readout,
)
from .sequence import (
    FringeScan,
    PulseSpec,
    Sequence,
    TimelineEntry,
    Wait,
    compile_timeline,
    evolve,
    scan,
    set_scan_value,
)
from .spinor import (
    GROUND,
    ROTATING,
    FieldParams,
    FrameConvention,
    SpinState,
    Unitary2,
    apply_unitary,
    closed_form_ramsey,
    effective_rabi,
    excitation_probability,
    free_unitary,
    pulse_unitary,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegradedStateError",
    "DoubleRetrievalPlan",
    "ExperimentConfig",
    "FieldParams",
    "FitError",
    "FitResult",
    "FrameConvention",
    "FringeScan",
    "GROUND",
    "InfeasiblePlanError",
    "InvalidDurationError",
    "InvalidFieldError",
    "MonteCarloResult",
    "NoFringeError",
    "NoPrecessionError",
    "NoiseModel",
    "PlanMismatchError",
    "PlannerError",
    "PulseSpec",
    "RamseyLockError",
    "RetrievalPlan",
    "ROTATING",
    "ScrambleKey",
    "Sequence",
    "SequenceError",
    "SpinState",
    "TimelineEntry",
    "Unitary2",
    "Wait",
    "WriteKey",
    "apply_contrast_decay",
    "apply_unitary",
    "build_double_retrieved",
    "build_double_scrambled",
    "build_retrieved",
    "build_scrambled",
    "build_write_read",
    "closed_form_ramsey",
    "compile_timeline",
    "effective_rabi",
    "evolve",
    "excitation_probability",
    "fit_damped_sinusoid",
    "free_unitary",
    "fringe_visibility",
    "monte_carlo_scramble",
    "parse_config",
    "phase_spread",
    "plan_double_retrieval",
    "plan_readout",
    "plan_retrieval",
    "pulse_unitary",
    "sample_phase_increment",
    "sample_relative_phase",
    "scan",
    "secret_readout",
    "serialize_config",
    "set_scan_value",
    "simulate_measurement",
]
