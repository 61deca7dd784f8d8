"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Tensor extents violate an operation's contract."""


class NonFiniteInputError(ValueError):
    """An operation that requires finite inputs received NaN or inf."""


class GradientNaNError(RuntimeError):
    """An optimizer step saw a non-finite gradient; carries the parameter name."""

    def __init__(self, param_name: str):
        super().__init__(f"non-finite gradient for parameter '{param_name}'")
        self.param_name = param_name


class NondeterministicLossError(RuntimeError):
    """Two forward passes of a supposedly deterministic loss disagreed."""


class DegenerateSceneError(RuntimeError):
    """Scene construction hit a degenerate configuration."""


class DegenerateGeometryError(RuntimeError):
    """Point configuration cannot support the requested model estimate."""


class CheiralityError(DegenerateGeometryError):
    """Essential-matrix decomposition could not disambiguate the pose."""


class MatchFormatError(ValueError):
    """A match TSV file violates the interchange schema."""
