from __future__ import annotations


class IdentificationError(Exception):
    """Base class for errors raised by the identification pipeline."""


class DomainError(IdentificationError, ValueError):
    pass


class UnsupportedRegimeError(IdentificationError):
    """A layer has k^2 - q_i <= 0, outside the oscillatory regime the solver handles."""

    def __init__(self, layer: int, value: float, k: float):
        self.layer = layer
        self.value = value
        self.k = k
        super().__init__(
            f"layer {layer} has value q={value!r} >= k^2={k * k!r}; "
            f"only k^2 - q > 0 is supported"
        )


class LayerIndexError(IdentificationError, IndexError):
    pass


class ConfigurationError(IdentificationError, ValueError):
    pass


class DegeneratePoolError(IdentificationError):
    pass


class OracleError(IdentificationError, RuntimeError):
    pass


class RiccatiRangeWarning(RuntimeWarning):
    """A scalar Riccati-Bessel value was clipped (j to zero, n to infinity)."""
