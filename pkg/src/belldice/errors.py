"""Exception types raised across the package."""


class BellDiceError(ValueError):
    """Base class for domain errors."""


class InvalidParameterError(BellDiceError):
    """A physical parameter is outside its allowed domain."""


class DegenerateMeasurementError(BellDiceError):
    """The POVM has no projective direction (zero detector efficiency)."""


class TruncationError(BellDiceError):
    """Neglected Fock-space probability mass exceeds the configured tolerance."""


class ZeroProbabilityError(BellDiceError):
    """Conditioning on an event of (numerically) zero probability."""


class BracketError(BellDiceError):
    """A bisection bracket does not straddle the target crossing."""
