"""Exception hierarchy shared by all freelab modules."""


class FreeLabError(Exception):
    """Base class for every error raised by freelab."""


class InvalidMeasure(FreeLabError, ValueError):
    pass


class NonPositiveMass(InvalidMeasure):
    pass


class NegativeDensity(InvalidMeasure):
    pass


class MassMismatch(InvalidMeasure):
    pass


class DuplicateAtom(InvalidMeasure):
    pass


class ZeroScale(InvalidMeasure):
    pass


class OrderTooHigh(FreeLabError, ValueError):
    pass


class AtomicUnsupported(FreeLabError, TypeError):
    """Operation needs a density but got an atomic measure."""


class AtomDetected(FreeLabError):
    """Stieltjes inversion found mass concentrating at a point."""


class MassLoss(FreeLabError):
    """Inverted density needed a renormalization outside [0.99, 1.01]."""


class NoConvergence(FreeLabError):
    """A fixed-point solve did not reach its residual tolerance."""


class DegenerateCoefficient(FreeLabError, ValueError):
    pass


class DensityTooSmall(FreeLabError):
    pass


class DimensionTooSmall(FreeLabError, ValueError):
    pass


class UnrealizableSpec(FreeLabError, ValueError):
    pass


class SpecError(FreeLabError, ValueError):
    """Malformed measure spec (JSON or named shorthand)."""
