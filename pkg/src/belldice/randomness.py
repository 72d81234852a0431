"""Certified min-entropy and random-bit rates from an observed CHSH value."""

import math
from dataclasses import dataclass

from .correlators import TSIRELSON, SourceParams, heralding_probability
from .errors import InvalidParameterError

__all__ = [
    "EntropyResult",
    "RateResult",
    "min_entropy",
    "rate_pump_limited",
    "rate_detection_limited",
]


@dataclass(frozen=True)
class EntropyResult:
    s: float
    h_min: float


@dataclass(frozen=True)
class RateResult:
    model: str
    rate: float
    r_reference: str


def min_entropy(s: float) -> EntropyResult:
    """Min-entropy per run, ``1 - log2(1 + sqrt(2 - s**2/4))``, clamped to 0 for ``s <= 2``."""
    if s < 0.0 or s > TSIRELSON + 1e-9:
        raise InvalidParameterError(f"CHSH value must lie in [0, 2*sqrt(2)], got {s}")
    if s <= 2.0:
        return EntropyResult(s=s, h_min=0.0)
    h = 1.0 - math.log2(1.0 + math.sqrt(max(2.0 - s * s / 4.0, 0.0)))
    return EntropyResult(s=s, h_min=min(h, 1.0))


def rate_pump_limited(src: SourceParams, s: float) -> RateResult:
    """Random bits per pump pulse: heralding probability times min-entropy."""
    h = min_entropy(s).h_min
    return RateResult(model="pump-limited", rate=heralding_probability(src) * h, r_reference="r_pump")


def rate_detection_limited(s: float) -> RateResult:
    return RateResult(model="detection-limited", rate=min_entropy(s).h_min, r_reference="r_d")
