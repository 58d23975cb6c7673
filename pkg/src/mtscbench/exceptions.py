"""Exception types shared across the package."""


class TsFormatError(ValueError):
    """Base class for `.ts` parse failures.

    Carries the 1-based line number and the offending token when known.
    """

    def __init__(self, message, line=None, token=None):
        self.line = line
        self.token = token
        where = f"line {line}: " if line is not None else ""
        tok = f" (token {token!r})" if token is not None else ""
        super().__init__(f"{where}{message}{tok}")


class MalformedHeader(TsFormatError):
    pass


class DimensionCountMismatch(TsFormatError):
    pass


class RaggedSeries(TsFormatError):
    pass


class UnknownClassLabel(TsFormatError):
    pass


class NonNumericValue(TsFormatError):
    pass


class ClassTooSmall(ValueError):
    pass


class ShapeMismatch(ValueError):
    """Query or pair of series whose shape disagrees with what is expected."""


class LengthMismatch(ShapeMismatch):
    pass


class DimensionMismatch(ShapeMismatch):
    pass


class EmptyModel(ValueError):
    pass


class ShapeletTooLong(ValueError):
    pass


class InvalidLengthBounds(ValueError):
    pass


class WindowTooLong(ValueError):
    pass


class EmptyPredictions(ValueError):
    pass


class IncompleteTable(ValueError):
    pass


class TooFewPairs(ValueError):
    pass


class MissingRuns(ValueError):
    pass


class NonConvergence(RuntimeWarning):
    """Optimiser stopped before reaching its gradient tolerance."""

    def __init__(self, message, grad_norm):
        self.grad_norm = grad_norm
        super().__init__(f"{message} (final gradient norm {grad_norm:.3e})")


class BudgetExceeded(RuntimeError):
    pass


class MemberFitError(RuntimeError):
    """A per-dimension ensemble member failed; ``dimension`` names which."""

    def __init__(self, dimension, cause):
        self.dimension = dimension
        super().__init__(f"member for dimension {dimension} failed: {cause!r}")
