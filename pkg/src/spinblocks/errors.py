"""Exception types shared across the package."""


class SpinBlocksError(Exception):
    """Base class for all package-specific errors."""


class SpaceMismatchError(SpinBlocksError):
    """Operands were built for different block spaces."""


class IntegrationError(SpinBlocksError):
    """Time integration failed (step underflow, step budget, trace drift)."""


class NoCrossingError(SpinBlocksError):
    """The target polarization fraction was never crossed within the horizon."""


class SteadyStateError(SpinBlocksError):
    """Steady-state eigenproblem failed to produce a usable null vector."""


class DegenerateSteadyStateError(SteadyStateError):
    """The zero eigenvalue is not simple and no initial state was supplied
    to resolve the ambiguity."""


class NumericError(SpinBlocksError):
    """A numerical sanity bound was violated (negative variance, residuals)."""


class UndefinedSqueezingError(SpinBlocksError):
    """Squeezing parameter requested for a state with vanishing mean spin."""


class ResourceError(SpinBlocksError):
    """A computation would exceed the configured size or memory budget."""


class VerificationError(SpinBlocksError):
    """Block-side and full-space results disagree beyond the threshold."""
