class TaskGraphError(Exception):
    """Base class for all errors raised by taskgraph."""


class InvalidInputError(TaskGraphError, ValueError):
    pass


class DatasetError(TaskGraphError, ValueError):
    """A dataset file failed to parse or references unknown key-steps."""


class ContractViolation(TaskGraphError, ValueError):
    pass


class DegenerateStateError(TaskGraphError, ArithmeticError):
    """No unobserved key-step has positive feasibility.

    ``position`` is set when the error surfaces while scoring a sequence.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class StructuralError(TaskGraphError, ValueError):
    pass


class TrainingError(TaskGraphError, RuntimeError):
    def __init__(self, message, epoch=None, cells=None):
        super().__init__(message)
        self.epoch = epoch
        self.cells = cells or []


class CapacityError(TaskGraphError, ValueError):
    pass


class UnsupportedOperation(TaskGraphError, NotImplementedError):
    pass


class TruncationWarning(UserWarning):
    """Emitted when the expand strategy hits its combination cap."""
