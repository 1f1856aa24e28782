"""Reference networks used by the shipped scenarios and the test-suite.

Node ids in the tables below are 1-based, as in the scenario files.
"""

from typing import Dict, Tuple

import numpy as np

from .control.models import ControlInstance, make_control_instance, uniform_bounds
from .graph import CentralityConfig, InfluenceGraph, build_graph, make_config, spectral_norm


__all__ = [
    "BENCHMARK_EDGES",
    "BENCHMARK_X0",
    "BENCHMARK_MUTED_NODE",
    "benchmark_graph",
    "benchmark_config",
    "benchmark_consensus_seed",
    "EQUALIZATION_WEIGHTS",
    "EQUALIZATION_CENTRALITY",
    "EQUALIZATION_ALPHA",
    "EQUALIZATION_BOUNDS",
    "equalization_graph",
    "equalization_instance",
]

# 15 agents in two clusters joined through agent 5
BENCHMARK_EDGES: Tuple[Tuple[int, int], ...] = (
    (1, 2), (1, 3), (2, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5), (4, 6), (5, 6),
    (5, 7), (5, 9), (5, 11), (6, 7), (6, 8), (7, 8), (7, 9), (8, 9), (8, 10), (9, 10),
    (11, 12), (11, 13), (11, 14), (11, 15), (12, 13), (13, 14), (13, 15), (14, 15),
)  # fmt: skip

BENCHMARK_X0 = np.array(
    [
        12.5107, 21.6097, 0.0034, 9.0700, 4.4027, 2.7702, 5.5878, 10.3668,
        11.9030, 16.1645, 12.5758, 20.5566, 6.1336, 26.3435, 0.8216,
    ]
)  # fmt: skip

# seeded with zero in the consensus run
BENCHMARK_MUTED_NODE = 5


def benchmark_graph() -> InfluenceGraph:
    """Unit influence on every edge direction."""

    return build_graph(15, [(i - 1, j - 1) for i, j in BENCHMARK_EDGES])


def benchmark_config(g: InfluenceGraph, margin: float = 0.8) -> CentralityConfig:
    """``alpha = margin / ||W||_2`` with the all-ones seed."""

    return make_config(g, margin / spectral_norm(g.weights))


def benchmark_consensus_seed(n: int = 15) -> np.ndarray:
    z = np.ones(n)
    z[BENCHMARK_MUTED_NODE - 1] = 0.0
    return z


# (a, b): w_ab, self-loops included
EQUALIZATION_WEIGHTS: Dict[Tuple[int, int], float] = {
    (1, 1): 5.0,
    (2, 2): 1.5,
    (3, 3): 1.7369,
    (4, 4): 3.2371,
    (5, 5): 3.2540,
    (6, 6): 1.5,
    (1, 2): 3.5196,
    (2, 1): 4.2857,
    (2, 3): 2.4847,
    (3, 2): 3.5572,
    (3, 4): 2.3786,
    (4, 3): 3.1991,
    (4, 5): 1.7450,
    (5, 4): 2.3857,
    (5, 6): 1.5,
    (6, 5): 2.7530,
    (3, 6): 1.5833,
    (6, 3): 2.0634,
}

# centrality of the weights above with alpha = 0.1 and the all-ones seed, to four decimals
EQUALIZATION_CENTRALITY = np.array([8.0, 7.0, 6.0, 5.0, 4.0, 3.0])
EQUALIZATION_ALPHA = 0.1
EQUALIZATION_BOUNDS = (1.5, 5.0)


def equalization_graph() -> InfluenceGraph:
    weights = {(a - 1, b - 1): w for (a, b), w in EQUALIZATION_WEIGHTS.items()}
    edges = {(min(a, b), max(a, b)) for a, b in weights if a != b}
    loops = [a for a, b in weights if a == b]
    return build_graph(6, sorted(edges), loops, weights)


def equalization_instance() -> ControlInstance:
    """Every node equally central: target one, seed ``rho / sum(rho)``, weights kept in ``[1.5, 5]``."""

    g = equalization_graph()
    lower, upper = EQUALIZATION_BOUNDS
    w_upper, w_lower = uniform_bounds(g, lower, upper)
    z = EQUALIZATION_CENTRALITY / EQUALIZATION_CENTRALITY.sum()
    return make_control_instance(g, w_upper, w_lower, np.ones(g.n), z, EQUALIZATION_ALPHA)
