class OversparseError(Exception):
    """Base class for library errors."""


class DimensionError(OversparseError, ValueError):
    """Image or coefficient shapes are incompatible with the request."""


class SubbandError(OversparseError, KeyError):
    """Unknown subband label or out-of-range coefficient position."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DomainError(OversparseError, ValueError):
    """Mask, measurement and reconstruction domains disagree."""


class DivergenceError(OversparseError, ArithmeticError):
    """Iteration produced non-finite values."""


class FormatError(OversparseError, ValueError):
    """Malformed or truncated file."""
