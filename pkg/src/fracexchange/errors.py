"""Exception types raised across the package."""


class FracExchangeError(Exception):
    """Base class for all package errors."""


class DomainError(FracExchangeError, ValueError):
    """An argument lies outside the domain of an operation."""


class DivergedInputError(FracExchangeError):
    """A field contains non-finite values where finite ones are required."""


class SymmetryViolationError(FracExchangeError):
    """Spectral coefficients do not represent a real function."""


class SymbolEvaluationError(FracExchangeError):
    """A Fourier multiplier is not finite on some grid wavenumber."""


class ResolutionError(FracExchangeError):
    """The grid does not resolve the requested structure."""


class ShapeError(FracExchangeError, ValueError):
    """Fields live on incompatible grids."""


class SignDomainError(FracExchangeError, ValueError):
    """A plain power was requested for a sign-changing state."""


class InsufficientDataError(FracExchangeError):
    """Too few samples (or too small a span) for a fit."""


class PreconditionError(FracExchangeError):
    """An operation was called on input that violates its contract."""


class ConfigError(FracExchangeError):
    """Configuration failed validation; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DegenerateWarning(UserWarning):
    """A hypothesis of an estimate fails (e.g. vanishing total mass)."""


class DataWarning(UserWarning):
    """Input samples were dropped or adjusted before use."""
