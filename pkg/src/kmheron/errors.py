"""Exception hierarchy shared across the package."""


class HeronError(Exception):
    """Base class for all kmheron errors."""


class DimensionMismatchError(HeronError, ValueError):
    pass


class ShapeMismatchError(HeronError, ValueError):
    """Configuration block counts do not match the problem instance."""


class InfeasibleError(HeronError, ValueError):
    """A point that must lie in a set does not (to tolerance)."""

    def __init__(self, message, kind=None, index=None):
        super().__init__(message)
        self.kind = kind
        self.index = index


class NumericFailureError(HeronError, ArithmeticError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateConfigurationError(HeronError, ValueError):
    """A feasible point coincides with a target point."""

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


class UnsupportedReductionError(HeronError, ValueError):
    pass


class UnboundedSetError(HeronError, ValueError):
    pass


class BudgetExceededError(HeronError, RuntimeError):
    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class SceneParseError(HeronError, ValueError):
    """Raised for malformed scene files; carries a field path or line number."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


class UnboundedProblemWarning(UserWarning):
    """No set in the instance is bounded, so a minimizer may not exist."""
