"""Exception hierarchy shared by all modules.

Parameter and structural problems are ValueErrors so they behave naturally
with argparse and config validation; numerical failures are RuntimeErrors.
"""


class ParameterError(ValueError):
    """An argument is outside its documented range (negative norm order, zero mode, ...)."""


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


class DomainError(ValueError):
    """Input is outside the domain of a map (negative argument, ball violation)."""


class ConvergenceError(RuntimeError):
    """An iterative solve (Neumann series, fixed point) failed to contract."""


class NumericalError(RuntimeError):
    """A numerical operation produced an unusable result (singular matrix, blowup)."""


class BlowupError(NumericalError):
    """Non-finite state during time integration; carries the failure time."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"non-finite state at t={time!r}")


class ConfigError(ValueError):
    """Invalid experiment configuration; message contains the offending path."""
