from __future__ import annotations


class InvalidArgument(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class GridMismatch(ValueError):
    pass


class InvariantViolation(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class SimulationError(RuntimeError):
    """Base for per-path failures; carries the offending path index when known."""

    def __init__(self, message: str, path_index: int | None = None):
        super().__init__(message)
        self.path_index = path_index

    def with_path(self, path_index: int) -> "SimulationError":
        err = type(self).__new__(type(self))
        err.__dict__.update(self.__dict__)
        err.args = (f"path {path_index}: {self.args[0]}",)
        err.path_index = path_index
        return err


class NumericalBlowup(SimulationError):
    def __init__(self, message: str, step: int, path_index: int | None = None):
        super().__init__(message, path_index)
        self.step = step


class ClockExhausted(SimulationError):
    pass
