from enum import Enum, IntEnum


__all__ = [
    "Protocol",
    "ExitStatus",
    "Saturation",
    "SolverKind",
    "TargetMode",
    "AlphaMode",
]


class Protocol(Enum):
    ESTIMATE = "estimate"
    CONSENSUS = "consensus"
    CONTROL_EXCHANGE = "control-exchange"
    MAX_CONSENSUS = "max-consensus"


class ExitStatus(IntEnum):
    OK = 0
    FAILURE = 1
    INPUT_ERROR = 2
    NOT_CONVERGED = 3
    INFEASIBLE = 4
    IO_ERROR = 5


class Saturation(Enum):
    """Where an incident weight sits at a given multiplier."""

    INTERIOR = "interior"
    LOWER = "lower"
    UPPER = "upper"


class SolverKind(Enum):
    BREAKPOINTS = "breakpoints"
    ENUMERATION = "enumeration"


class TargetMode(Enum):
    ONES = "ones"
    UNIFORM = "uniform"


class AlphaMode(Enum):
    EXPLICIT = "explicit"
    # margin * 1 / sqrt(||W||_1 ||W||_inf)
    BOUND_FRACTION = "bound-fraction"
    # margin / ||W||_2
    SPECTRAL_FRACTION = "spectral-fraction"
