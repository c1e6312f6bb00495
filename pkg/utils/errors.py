# utils/errors.py
from __future__ import annotations


class SchedulingError(Exception):
    """Base class. `exit_code` is what the CLI returns when this escapes a verb."""
    exit_code: int = 1


# --- instance problems (exit 2) ---

class InstanceError(SchedulingError):
    exit_code = 2


class InstanceParseError(InstanceError):
    pass


class NoData(InstanceError):
    pass


class NoGain(InstanceError):
    pass


# --- infeasibility (exit 3) ---

class InfeasibleError(SchedulingError):
    exit_code = 3


class DeadlineBeforeData(InfeasibleError):
    def __init__(self, deadline: float, last_data_time: float):
        super().__init__(
            f"deadline T={deadline!r} is before the last data arrival at t={last_data_time!r}"
        )
        self.deadline = deadline
        self.last_data_time = last_data_time


class Infeasible(InfeasibleError):
    def __init__(self, energy_available: float, energy_required: float, message: str | None = None):
        super().__init__(
            message
            or f"instance infeasible: {energy_available!r} J available, more than {energy_required!r} J needed"
        )
        self.energy_available = energy_available
        self.energy_required = energy_required


class NoFeasibleGridPoint(InfeasibleError):
    pass


# --- solver failures (exit 4) ---

class SolverError(SchedulingError):
    exit_code = 4


class SingularHessian(SolverError):
    pass


class NonFiniteObjective(SolverError):
    pass


class BoundSearchExhausted(SolverError):
    pass


# --- validation (exit 5) ---

class ValidationFailed(SchedulingError):
    exit_code = 5


# --- programming errors ---

class DimensionMismatch(SchedulingError, ValueError):
    pass


class NegativePower(SchedulingError, ValueError):
    pass


class GridTooLarge(SchedulingError, ValueError):
    pass
