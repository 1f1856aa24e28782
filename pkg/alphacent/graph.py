from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx
import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import config
from .constants import AlphaMode
from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    EpsilonTooLarge,
    GraphError,
    InvalidConfiguration,
    InvalidNodeIndex,
    NegativeWeight,
    NonConvergence,
    WeightOutsideEdgeSet,
    ZeroMatrix,
)
from .helpers.utils import exact_col_sums, exact_row_sums

if TYPE_CHECKING:
    from .simnet.engine import SimNetwork


__all__ = [
    "InfluenceGraph",
    "PerronMatrix",
    "CentralityConfig",
    "build_graph",
    "matrix_norms",
    "alpha_bound",
    "alpha_bound_from_norms",
    "distributed_alpha_agreement",
    "perron_matrix",
    "spectral_radius",
    "spectral_norm",
    "diameter",
    "make_config",
    "resolve_alpha",
]

log = logging.getLogger(__name__)

WeightSpec = Union[Mapping[Tuple[int, int], float], np.ndarray, None]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class InfluenceGraph:
    """Undirected communication topology carrying an asymmetric influence matrix.

    Indices are 0-based. Instances are immutable; use :func:`build_graph` to create one.

    Attributes
    ----------
    n : int
        Number of agents.
    edges : FrozenSet[Tuple[int, int]]
        Unordered edges stored as ``(i, j)`` with ``i < j``.
    self_loops : FrozenSet[int]
        Agents with a self-influence weight.
    weights : np.ndarray
        The ``n x n`` influence matrix ``W``; ``weights[i, j]`` is ``w_ij``.
    """

    n: int
    edges: FrozenSet[Tuple[int, int]]
    self_loops: FrozenSet[int] = field(default_factory=frozenset)
    weights: np.ndarray = None

    @cached_property
    def neighbors(self) -> Tuple[Tuple[int, ...], ...]:
        """Ascending neighbor ids per agent, self-loops excluded."""

        adjacent: List[List[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adjacent[i].append(j)
            adjacent[j].append(i)
        return tuple(tuple(sorted(a)) for a in adjacent)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return _frozen(a)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=int)

    @property
    def d_max(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean mask of entries allowed to be nonzero (the set of compatible matrices)."""

        mask = self.adjacency.astype(bool)
        for i in self.self_loops:
            mask[i, i] = True
        mask.setflags(write=False)
        return mask

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.weights, self.weights.T))

    def extended_neighbors(self, i: int) -> Tuple[int, ...]:
        """Neighbors of ``i`` plus ``i`` itself when it carries a self-loop, ascending."""

        if i in self.self_loops:
            return tuple(sorted((*self.neighbors[i], i)))
        return self.neighbors[i]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def with_weights(self, weights: np.ndarray) -> InfluenceGraph:
        """Same topology, different influence matrix (validated)."""

        return build_graph(self.n, self.edges, self.self_loops, np.asarray(weights, dtype=float))

    def __repr__(self) -> str:
        return f"<InfluenceGraph n={self.n} edges={len(self.edges)} self_loops={len(self.self_loops)}>"


@dataclass(frozen=True, eq=False)
class PerronMatrix:
    """``Q = I - eps * L`` for the unweighted communication graph.

    Attributes
    ----------
    q : np.ndarray
        The symmetric, doubly stochastic mixing matrix.
    epsilon : float
        The step used to build ``q``.
    lambda2 : float
        Modulus of the second largest eigenvalue of ``q``.
    """

    q: np.ndarray
    epsilon: float
    lambda2: float


@dataclass(frozen=True, eq=False)
class CentralityConfig:
    """Attenuation ``alpha`` and seed vector ``z``. Build with :func:`make_config` to validate."""

    alpha: float
    z: np.ndarray

    @property
    def n(self) -> int:
        return len(self.z)


def _check_index(i: int, n: int):
    if not 0 <= i < n:
        raise InvalidNodeIndex(f"Node index {i} out of range for n={n}.")


def build_graph(
    n: int,
    edges: Iterable[Tuple[int, int]],
    self_loops: Iterable[int] = (),
    weights: WeightSpec = None,
) -> InfluenceGraph:
    """Validates and builds an :class:`InfluenceGraph`.

    Parameters
    ----------
    n : int
        Number of agents.
    edges : Iterable[Tuple[int, int]]
        Unordered pairs of distinct 0-based agent ids.
    self_loops : Iterable[int]
        Agents carrying a self-influence weight.
    weights : Mapping[Tuple[int, int], float] | np.ndarray | None
        Either a dense ``n x n`` matrix, a sparse ``{(i, j): w_ij}`` assignment (missing entries are zero),
        or ``None`` for unit weights on every edge direction and self-loop.

    Raises
    ------
    DisconnectedGraph
        The undirected graph is not connected.
    WeightOutsideEdgeSet
        A nonzero weight sits on a pair that is neither an edge nor a self-loop.
    NegativeWeight
        A weight is negative.
    """

    if n < 1:
        raise GraphError("A graph needs at least one agent.")

    edge_set = set()
    for i, j in edges:
        _check_index(i, n)
        _check_index(j, n)
        if i == j:
            raise GraphError(f"Edge ({i}, {j}) joins an agent to itself; declare it as a self-loop.")
        edge_set.add((min(i, j), max(i, j)))

    loop_set = set()
    for i in self_loops:
        _check_index(i, n)
        loop_set.add(i)

    graph = InfluenceGraph(n=n, edges=frozenset(edge_set), self_loops=frozenset(loop_set), weights=None)

    if weights is None:
        w = graph.support.astype(float)
    elif isinstance(weights, np.ndarray):
        if weights.shape != (n, n):
            raise DimensionMismatch(f"Weight matrix has shape {weights.shape}, expected ({n}, {n}).")
        w = np.array(weights, dtype=float)
    else:
        w = np.zeros((n, n))
        for (i, j), value in weights.items():
            _check_index(i, n)
            _check_index(j, n)
            w[i, j] = value

    if not np.all(np.isfinite(w)):
        raise GraphError("Influence weights must be finite.")
    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        raise NegativeWeight(f"Weight w[{i}, {j}] = {w[i, j]} is negative.")

    outside = (w != 0) & ~graph.support
    if np.any(outside):
        i, j = np.argwhere(outside)[0]
        raise WeightOutsideEdgeSet(f"Weight w[{i}, {j}] = {w[i, j]} lies outside the edge set.")

    if not nx.is_connected(graph.to_networkx()):
        raise DisconnectedGraph

    object.__setattr__(graph, "weights", _frozen(w))
    return graph


def matrix_norms(weights: np.ndarray) -> Tuple[float, float]:
    """``(||W||_1, ||W||_inf)``: the largest column sum and the largest row sum."""

    return float(exact_col_sums(weights).max()), float(exact_row_sums(weights).max())


def alpha_bound_from_norms(norm_one: float, norm_inf: float) -> float:
    if norm_one <= 0 or norm_inf <= 0:
        raise ZeroMatrix
    return 1.0 / math.sqrt(norm_one * norm_inf)


def alpha_bound(g: InfluenceGraph) -> float:
    """Upper bound on alpha such that every smaller alpha satisfies ``alpha * rho(W) < 1``."""

    return alpha_bound_from_norms(*matrix_norms(g.weights))


def distributed_alpha_agreement(net: "SimNetwork", g: InfluenceGraph, margin: float) -> float:
    """Lets the agents agree on ``margin * alpha_bound(g)`` through max-consensus.

    Each agent starts from its own row and column sums; after at most ``diameter(g)`` rounds of
    max-consensus every agent holds both norms and computes the same alpha.
    """

    from .simnet.protocols import MaxConsensusProtocol

    if not 0 < margin <= 1:
        raise InvalidConfiguration(f"Alpha margin must lie in (0, 1], got {margin}.")
    if net.g is not g:
        raise InvalidConfiguration("The network was built on a different graph.")

    net.run(MaxConsensusProtocol(margin))
    values = [agent.state["alpha"] for agent in net.agents]
    if any(math.isnan(v) for v in values):
        raise ZeroMatrix
    if len(set(values)) != 1:
        raise NonConvergence("Agents did not agree on alpha.")

    alpha = values[0]
    log.info(f"Agents agreed on alpha = {alpha:.15g}")
    return alpha


def laplacian(g: InfluenceGraph) -> np.ndarray:
    return np.diag(g.adjacency.sum(axis=1)) - g.adjacency


def perron_matrix(g: InfluenceGraph, epsilon: Optional[float] = None) -> PerronMatrix:
    """Builds ``Q = I - eps L(G)``; ``epsilon=None`` picks ``1 / (d_max + 1)``."""

    if epsilon is None:
        epsilon = 1.0 / (g.d_max + 1)
    if epsilon <= 0:
        raise EpsilonTooLarge(f"Epsilon must be positive, got {epsilon}.")
    if g.d_max > 0 and epsilon >= 1.0 / g.d_max:
        raise EpsilonTooLarge(f"Epsilon {epsilon} must be below 1/d_max = {1.0 / g.d_max}.")

    q = np.eye(g.n) - epsilon * laplacian(g)
    centered = q - np.full((g.n, g.n), 1.0 / g.n)
    lambda2 = float(np.abs(scipy.linalg.eigvalsh(centered)).max())

    log.debug(f"Perron matrix with epsilon={epsilon:.6g}, lambda2={lambda2:.6g}")
    return PerronMatrix(q=_frozen(q), epsilon=float(epsilon), lambda2=lambda2)


def spectral_radius(weights: np.ndarray) -> float:
    """Spectral radius of a square matrix; dense eigensolve at desk scale, ARPACK beyond it."""

    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {weights.shape}.")
    if not np.any(weights):
        return 0.0

    n = weights.shape[0]
    if n <= config.DENSE_EIGEN_LIMIT:
        return float(np.abs(scipy.linalg.eigvals(weights)).max())

    try:
        values = scipy.sparse.linalg.eigs(weights, k=1, which="LM", return_eigenvectors=False, tol=1e-12)
    except scipy.sparse.linalg.ArpackNoConvergence as e:
        raise NonConvergence(f"Spectral radius did not converge: {e}")
    return float(np.abs(values).max())


def spectral_norm(weights: np.ndarray) -> float:
    return float(scipy.linalg.norm(weights, 2))


def diameter(g: InfluenceGraph) -> int:
    return nx.diameter(g.to_networkx()) if g.n > 1 else 0


def make_config(g: InfluenceGraph, alpha: float, z: Optional[Iterable[float]] = None) -> CentralityConfig:
    """Validates alpha and z against ``g``; ``z=None`` means the all-ones seed."""

    z = np.ones(g.n) if z is None else np.asarray(z, dtype=float)
    if z.shape != (g.n,):
        raise DimensionMismatch(f"Seed vector has length {z.size}, expected {g.n}.")
    if np.any(z < 0) or not np.any(z > 0):
        raise InvalidConfiguration("Seed vector z must be nonnegative with at least one positive entry.")
    if not alpha > 0:
        raise InvalidConfiguration(f"Alpha must be positive, got {alpha}.")

    radius = spectral_radius(g.weights)
    if alpha * radius >= 1:
        raise InvalidConfiguration(f"alpha * rho(W) = {alpha * radius:.6g} must be below 1.")

    return CentralityConfig(alpha=float(alpha), z=_frozen(z))


def resolve_alpha(g: InfluenceGraph, mode: AlphaMode, value: float) -> float:
    if mode is AlphaMode.EXPLICIT:
        return float(value)
    if mode is AlphaMode.BOUND_FRACTION:
        return value * alpha_bound(g)
    if mode is AlphaMode.SPECTRAL_FRACTION:
        norm = spectral_norm(g.weights)
        if norm == 0:
            raise ZeroMatrix
        return value / norm
    raise ValueError(f"Unknown alpha mode {mode!r}")
