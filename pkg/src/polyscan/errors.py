"""Exception types shared across the package."""


class PolyscanError(Exception):
    """Base class for all polyscan errors."""


class UnsupportedFieldError(PolyscanError):
    """Characteristic not in the supported set, or q = p^r too large."""


class ReducibleModulusError(PolyscanError):
    """A field modulus failed the irreducibility check."""


class CharacteristicMismatchError(PolyscanError):
    """Operands live over fields of different characteristic."""


class EmbeddingUnsupportedError(PolyscanError):
    """Extension evaluation requested over a non-prime base field."""


class CapExceededError(PolyscanError):
    """An exact result does not fit the degree cap and truncation was not allowed."""


class SingularAffineError(PolyscanError):
    """The affine part of a map is not invertible."""


class NonIdentityAffineError(PolyscanError):
    """Operation requires a map whose affine part is the identity."""


class NotAutomorphismError(PolyscanError):
    """Operation requires a polynomial automorphism."""


class ParseError(PolyscanError):
    """Map literal syntax error; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class CheckpointMismatchError(PolyscanError):
    """Checkpoint was written under a different scan configuration."""


class MissingInputError(PolyscanError):
    """A required input file or database is absent or inconsistent."""
