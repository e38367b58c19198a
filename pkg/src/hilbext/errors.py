"""Exception types raised by hilbext."""


class HilbextError(Exception):
    """Base class for all hilbext errors."""


class ValidationError(HilbextError, ValueError):
    """A constructed object violates one of its invariants."""


class LiftFailure(HilbextError):
    """A circle-valued loop cannot be lifted reliably (undersampled)."""


class NonStabilizing(HilbextError):
    """A tower- or truncation-indexed quantity did not settle."""


class Unstable(HilbextError):
    """Invariant records disagree across tower levels."""
