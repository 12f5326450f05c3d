"""Exception types shared across the package.

Validation failures subclass ValueError so careless call sites still fail
loudly; the CLI maps them to exit code 2. Budget overruns are runtime
conditions, not caller mistakes, and map to exit code 3.
"""


class DimensionMismatchError(ValueError):
    """Two vectors or operators with incompatible Hilbert-space dimensions."""


class InvalidParameterError(ValueError):
    """A parameter outside its admissible range (dimension, angle, error, ...)."""


class DecodeError(ValueError):
    """A bit string that is not a valid codeword of the wire format."""


class BudgetExceededError(RuntimeError):
    """A run exceeded its trial or communication budget and was aborted."""


class BoundViolationError(RuntimeError):
    """A measured quantity landed outside its guaranteed analytic bounds."""
