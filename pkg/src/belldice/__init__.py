"""Heralded single-photon CHSH tests with displaced click detectors.

Closed-form correlators, a truncated Fock-space cross-check, a multi-start
CHSH optimizer and certified-randomness bookkeeping.
"""

from .correlators import (
    MIN_SQUEEZING,
    TSIRELSON,
    JointProbabilities,
    MeasurementSettings,
    SourceParams,
    ch_value,
    chsh_value,
    correlator,
    dark_count_adjusted_correlator,
    heralded_weights,
    heralding_probability,
    joint_probabilities,
)
from .errors import (
    BellDiceError,
    BracketError,
    DegenerateMeasurementError,
    InvalidParameterError,
    TruncationError,
    ZeroProbabilityError,
)
from .kernels import BACKEND
from .optimizer import (
    OptimizationProblem,
    OptimizationResult,
    find_eta_min,
    optimize_chsh,
    optimize_rate,
    strategy_equivalence_check,
)
from .povm import DisplacedClickDetector, bloch_trajectory, extremal_decomposition, povm_qubit_matrix
from .randomness import min_entropy, rate_detection_limited, rate_pump_limited

__version__ = "0.1.0"
