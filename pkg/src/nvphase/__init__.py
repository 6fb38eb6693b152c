"""Fast simulator for geometric nuclear-spin phase gates in NV centres.

Frequencies in the public dataclasses are cyclic MHz (value/2pi); the
physics routines work internally in rad/us with times in us.
"""

from .conditional import ConditionalReport, conditional_numeric, conditional_shift
from .errors import (ContractError, ConvergenceError, DegenerateError, DimensionError,
                     NonCyclicError, NVPhaseError, SingularParameterError)
from .frames import GateSpeedReport, gate_speed, static_eigensystem
from .model import (QuantumState, RotatingField, SpinConstants, StaticFields, from_angular,
                    to_angular, validate_regime)
from .noise import (NoiseModel, epsilon_dec, epsilon_sys, mc_gate_error, static_coherence,
                    t2star_gate, t2star_static)
from .propagate import PhaseResult, PropagationConfig, global_phase, propagate, run_gate

__version__ = "0.1.0"

__all__ = [
    "ConditionalReport", "ContractError", "ConvergenceError", "DegenerateError", "DimensionError",
    "GateSpeedReport", "NVPhaseError", "NoiseModel", "NonCyclicError", "PhaseResult",
    "PropagationConfig", "QuantumState", "RotatingField", "SingularParameterError",
    "SpinConstants", "StaticFields", "conditional_numeric", "conditional_shift", "epsilon_dec",
    "epsilon_sys", "from_angular", "gate_speed", "global_phase", "mc_gate_error", "propagate",
    "run_gate", "static_coherence", "static_eigensystem", "t2star_gate", "t2star_static",
    "to_angular", "validate_regime",
]
