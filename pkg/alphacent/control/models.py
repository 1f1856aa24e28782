from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..constants import Saturation, SolverKind
from ..errors import DimensionMismatch, InvalidControlInstance
from ..graph import InfluenceGraph

if TYPE_CHECKING:
    from ..simnet.agent import Agent


__all__ = [
    "ControlInstance",
    "make_control_instance",
    "uniform_bounds",
    "LocalProblem",
    "NodeSolution",
    "ControlSolution",
    "RowViolation",
    "FeasibilityReport",
]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ControlInstance:
    """Weight-adjustment problem: reach ``rho_star`` with the least change of ``W`` inside ``[w_lower, w_upper]``.

    Build with :func:`make_control_instance` so the invariants are checked.

    Attributes
    ----------
    g : InfluenceGraph
        Topology and current weights ``W``.
    w_upper : np.ndarray
        Elementwise upper bounds, zero off the support.
    w_lower : np.ndarray
        Elementwise lower bounds, zero off the support.
    rho_star : np.ndarray
        Strictly positive target centrality.
    z : np.ndarray
        Seed vector.
    alpha : float
        Attenuation.
    """

    g: InfluenceGraph
    w_upper: np.ndarray
    w_lower: np.ndarray
    rho_star: np.ndarray
    z: np.ndarray
    alpha: float

    @property
    def n(self) -> int:
        return self.g.n

    def with_target(self, rho_star: Iterable[float]) -> ControlInstance:
        return make_control_instance(self.g, self.w_upper, self.w_lower, rho_star, self.z, self.alpha)


def uniform_bounds(g: InfluenceGraph, lower: float, upper: float) -> Tuple[np.ndarray, np.ndarray]:
    """``(w_upper, w_lower)`` holding the same bounds on every supported entry."""

    support = g.support.astype(float)
    return support * upper, support * lower


def make_control_instance(
    g: InfluenceGraph,
    w_upper: np.ndarray,
    w_lower: np.ndarray,
    rho_star: Iterable[float],
    z: Iterable[float],
    alpha: float,
) -> ControlInstance:
    """Validates and builds a :class:`ControlInstance`.

    Raises
    ------
    InvalidControlInstance
        Bounds leave the support, do not bracket ``W`` or are negative; ``rho_star`` is not positive
        or lies below ``z``.
    """

    n = g.n
    w_upper = np.asarray(w_upper, dtype=float)
    w_lower = np.asarray(w_lower, dtype=float)
    rho_star = np.asarray(rho_star, dtype=float)
    z = np.asarray(z, dtype=float)

    for name, matrix in (("w_upper", w_upper), ("w_lower", w_lower)):
        if matrix.shape != (n, n):
            raise DimensionMismatch(f"{name} has shape {matrix.shape}, expected ({n}, {n}).")
        if np.any(matrix[~g.support] != 0):
            raise InvalidControlInstance(f"{name} has entries outside the edge set.")
    for name, vector in (("rho_star", rho_star), ("z", z)):
        if vector.shape != (n,):
            raise DimensionMismatch(f"{name} has length {vector.size}, expected {n}.")

    if np.any(w_lower < 0):
        raise InvalidControlInstance("Lower bounds must be nonnegative.")
    if np.any(w_lower > g.weights) or np.any(g.weights > w_upper):
        i, j = np.argwhere((w_lower > g.weights) | (g.weights > w_upper))[0]
        raise InvalidControlInstance(
            f"Weight w[{i + 1}, {j + 1}] = {g.weights[i, j]} lies outside [{w_lower[i, j]}, {w_upper[i, j]}]."
        )
    if np.any(rho_star <= 0):
        raise InvalidControlInstance("Target centrality must be strictly positive.")
    if np.any(z < 0):
        raise InvalidControlInstance("Seed vector must be nonnegative.")
    if np.any(rho_star < z):
        raise InvalidControlInstance("Target centrality must not lie below the seed vector.")
    if not alpha > 0:
        raise InvalidControlInstance(f"Alpha must be positive, got {alpha}.")

    return ControlInstance(
        g=g,
        w_upper=_frozen(w_upper),
        w_lower=_frozen(w_lower),
        rho_star=_frozen(rho_star),
        z=_frozen(z),
        alpha=float(alpha),
    )


@dataclass(frozen=True, eq=False)
class LocalProblem:
    """Everything node ``i`` needs to solve for its own column of the adjustment.

    Arrays are aligned with ``neighborhood``: entry ``k`` describes the weight ``w_ji`` for
    ``j = neighborhood[k]``.

    Attributes
    ----------
    node : int
        The node ``i``.
    neighborhood : Tuple[int, ...]
        Neighbors of ``i`` in ascending order, including ``i`` when it has a self-loop.
    w, w_lower, w_upper : np.ndarray
        Current weights ``w_ji`` and their bounds.
    rho : np.ndarray
        Targets ``rho_star_j`` of the neighborhood.
    rho_i, z_i, alpha : float
        Own target, own seed and attenuation.
    """

    node: int
    neighborhood: Tuple[int, ...]
    w: np.ndarray
    w_lower: np.ndarray
    w_upper: np.ndarray
    rho: np.ndarray
    rho_i: float
    z_i: float
    alpha: float

    @property
    def degree(self) -> int:
        return len(self.neighborhood)

    @property
    def demand(self) -> float:
        """``(rho_star_i - z_i) / alpha``: the weighted column sum the adjusted weights must reach."""

        return (self.rho_i - self.z_i) / self.alpha

    @classmethod
    def from_instance(cls, inst: ControlInstance, i: int) -> LocalProblem:
        if not 0 <= i < inst.n:
            raise DimensionMismatch(f"Node index {i} out of range for n={inst.n}.")
        hood = inst.g.extended_neighbors(i)
        idx = list(hood)
        return cls(
            node=i,
            neighborhood=hood,
            w=_frozen(inst.g.weights[idx, i]),
            w_lower=_frozen(inst.w_lower[idx, i]),
            w_upper=_frozen(inst.w_upper[idx, i]),
            rho=_frozen(inst.rho_star[idx]),
            rho_i=float(inst.rho_star[i]),
            z_i=float(inst.z[i]),
            alpha=inst.alpha,
        )

    @classmethod
    def from_buffer(cls, agent: "Agent") -> LocalProblem:
        """Builds the problem from what ``agent`` collected in one control-exchange round."""

        own = agent.state
        hood = tuple(sorted(agent.buffer))
        rows = [agent.buffer[j] for j in hood]
        return cls(
            node=agent.id,
            neighborhood=hood,
            w=_frozen([r["w"] for r in rows]),
            w_lower=_frozen([r["w_lower"] for r in rows]),
            w_upper=_frozen([r["w_upper"] for r in rows]),
            rho=_frozen([r["rho_star"] for r in rows]),
            rho_i=float(own["rho_star"]),
            z_i=float(own["z"]),
            alpha=float(own["alpha"]),
        )


@dataclass(frozen=True, eq=False)
class NodeSolution:
    """Result of one per-node solve.

    Attributes
    ----------
    node : int
        The node ``i``.
    lambda_ : float
        Multiplier ``lambda_i``.
    neighborhood : Tuple[int, ...]
        Rows of column ``i`` that ``proposal`` and ``column`` refer to.
    labels : Tuple[Saturation, ...]
        Saturation of every entry at ``lambda_``.
    proposal : np.ndarray
        Adjusted weights ``clip(w - lambda_ * rho, w_lower, w_upper)``.
    column : np.ndarray
        The deltas ``proposal - w``.
    solver : SolverKind
        Which solver produced the result.
    visited : int
        Partitions examined (enumeration) or breakpoints scanned.
    """

    node: int
    lambda_: float
    neighborhood: Tuple[int, ...]
    labels: Tuple[Saturation, ...]
    proposal: np.ndarray
    column: np.ndarray
    solver: SolverKind
    visited: int = 0

    @property
    def partition(self) -> Dict[Saturation, Tuple[int, ...]]:
        groups: Dict[Saturation, List[int]] = {s: [] for s in Saturation}
        for j, label in zip(self.neighborhood, self.labels):
            groups[label].append(j)
        return {s: tuple(v) for s, v in groups.items()}


@dataclass(frozen=True, eq=False)
class ControlSolution:
    """Optimal adjustment ``X*`` and its certificate.

    Attributes
    ----------
    x_star : np.ndarray
        Weight deltas, zero off the support.
    w_new : np.ndarray
        Adjusted weights; every entry lies inside its bounds exactly.
    lambda_star : np.ndarray
        One multiplier per node.
    objective : float
        ``0.5 * ||X*||_F^2``.
    partitions : List[Dict[Saturation, Tuple[int, ...]]]
        Per node, the rows that ended interior, at the lower bound and at the upper bound.
    residual : float
        ``||(I - alpha (W + X*)^T) rho_star - z||_inf``.
    solver : Optional[SolverKind]
        ``None`` for the reference QP oracle.
    """

    x_star: np.ndarray
    w_new: np.ndarray
    lambda_star: np.ndarray
    objective: float
    partitions: List[Dict[Saturation, Tuple[int, ...]]]
    residual: float
    solver: Optional[SolverKind] = None
    spread_before: float = None
    spread_after: float = None


@dataclass(frozen=True)
class RowViolation:
    """Node ``node`` misses its bound by ``amount`` (always positive)."""

    node: int
    bound: str
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: List[RowViolation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.feasible

    def lines(self) -> List[str]:
        return [f"row {v.node + 1} {v.bound} {v.amount:.15g}" for v in self.violations]
