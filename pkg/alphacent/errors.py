from __future__ import annotations

from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from .control.models import FeasibilityReport


__all__ = [
    "AlphaCentralityError",
    "GraphError",
    "DisconnectedGraph",
    "WeightOutsideEdgeSet",
    "NegativeWeight",
    "InvalidNodeIndex",
    "ZeroMatrix",
    "EpsilonTooLarge",
    "DimensionMismatch",
    "InvalidConfiguration",
    "NumericalError",
    "NonConvergence",
    "SingularSystem",
    "KappaNotLessThanOne",
    "ZeroCentralityVector",
    "MaxRoundsExceeded",
    "ControlError",
    "InvalidControlInstance",
    "NoValidPartition",
    "NeighborhoodTooLarge",
    "ConstraintResidualTooLarge",
    "InfeasibleTarget",
    "ProtocolError",
    "ScenarioError",
]


class AlphaCentralityError(Exception):
    message = "An alpha-centrality error occurred"

    def __init__(self, message: Optional[str] = None, *args):
        super().__init__(message or self.message, *args)


class GraphError(AlphaCentralityError):
    message = "Invalid influence graph."


class DisconnectedGraph(GraphError):
    message = "The communication graph is not connected."


class WeightOutsideEdgeSet(GraphError):
    message = "A weight was given for a pair that is neither an edge nor a self-loop."


class NegativeWeight(GraphError):
    message = "Influence weights must be nonnegative."


class InvalidNodeIndex(GraphError):
    message = "Node index out of range."


class ZeroMatrix(GraphError):
    message = "The influence matrix is identically zero."


class EpsilonTooLarge(GraphError):
    message = "The Perron step must be strictly below 1 / d_max."


class DimensionMismatch(AlphaCentralityError):
    message = "Vector length does not match the number of agents."


class InvalidConfiguration(AlphaCentralityError):
    message = "Invalid centrality configuration."


class NumericalError(AlphaCentralityError):
    message = "A numerical routine failed."


class NonConvergence(NumericalError):
    message = "Iteration cap reached without convergence."


class SingularSystem(NumericalError):
    message = "The centrality system is singular; check that alpha * rho(W) < 1."


class KappaNotLessThanOne(NumericalError):
    message = "The contraction factor kappa must be strictly below one."


class ZeroCentralityVector(NumericalError):
    message = "The centrality vector must be nonnegative and not identically zero."


class MaxRoundsExceeded(AlphaCentralityError):
    """Raised when an iteration stops at its round cap.

    Attributes
    ----------
    residuals : Dict[str, float]
        The residuals reached at the last round.
    state : Any
        The last state of the iteration.
    trace : Any
        The trace recorded up to the last round.
    """

    message = "Maximum number of rounds reached before convergence."

    def __init__(
        self,
        message: Optional[str] = None,
        *,
        residuals: Optional[Dict[str, float]] = None,
        state: Any = None,
        trace: Any = None,
    ):
        self.residuals: Dict[str, float] = residuals or {}
        self.state = state
        self.trace = trace

        if message is None and self.residuals:
            details = ", ".join(f"{k}={v:.3e}" for k, v in self.residuals.items())
            message = f"{self.message} ({details})"

        super().__init__(message)


class ControlError(AlphaCentralityError):
    message = "Centrality control failed."


class InvalidControlInstance(ControlError):
    message = "Invalid control instance."


class NoValidPartition(ControlError):
    message = "No partition of the neighborhood satisfies the optimality conditions."


class NeighborhoodTooLarge(ControlError):
    message = "Neighborhood too large for partition enumeration."


class ConstraintResidualTooLarge(ControlError):
    message = "The assembled solution violates the centrality constraint."


class InfeasibleTarget(ControlError):
    """Raised when the target centrality cannot be reached within the weight bounds.

    Attributes
    ----------
    report : FeasibilityReport
        The per-node feasibility verdict.
    """

    message = "The target centrality is unreachable within the weight bounds."

    def __init__(self, report: "FeasibilityReport", message: Optional[str] = None):
        self.report = report
        if message is None:
            rows = ", ".join(str(v.node + 1) for v in report.violations)
            message = f"{self.message} Violated rows: {rows}"
        super().__init__(message)


class ProtocolError(AlphaCentralityError):
    message = "A protocol failed during simulation."

    def __init__(self, message: Optional[str] = None, *, round_index: Optional[int] = None):
        self.round_index: Optional[int] = round_index
        message = message or self.message
        if round_index is not None:
            message = f"{message} (round {round_index})"
        super().__init__(message)


class ScenarioError(AlphaCentralityError):
    message = "Could not read the scenario."

    def __init__(self, message: Optional[str] = None, *, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        message = message or self.message
        location: List[str] = []
        if path is not None:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{':'.join(location)}: {message}"
        super().__init__(message)
