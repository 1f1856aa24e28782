from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from alphacent.control.models import make_control_instance
from alphacent.datasets import benchmark_graph, equalization_instance
from alphacent.estimation import oracle_alpha_centrality
from alphacent.graph import CentralityConfig, alpha_bound, build_graph

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def random_graph(rng: np.random.Generator, n: int, low: float = 0.0, high: float = 2.0, loops: float = 0.3):
    """Connected small-world topology with independent weights in both directions of every edge."""

    topology = nx.connected_watts_strogatz_graph(n, k=2, p=0.3, seed=int(rng.integers(2**31)))
    edges = list(topology.edges)
    self_loops = [i for i in range(n) if rng.random() < loops]

    weights = {}
    for i, j in edges:
        weights[i, j] = rng.uniform(low, high)
        weights[j, i] = rng.uniform(low, high)
    for i in self_loops:
        weights[i, i] = rng.uniform(low, high)
    return build_graph(n, edges, self_loops, weights)


def random_control_instance(rng: np.random.Generator, n: int, target_ones: bool = False):
    """A feasible instance: the target is the centrality of some weights inside the bounds."""

    g = random_graph(rng, n, low=0.5, high=2.0)
    support = g.support.astype(float)
    w_lower = g.weights * rng.uniform(0.2, 1.0, size=(n, n)) * support
    w_upper = g.weights * rng.uniform(1.0, 2.0, size=(n, n)) * support
    reachable = w_lower + rng.uniform(size=(n, n)) * (w_upper - w_lower)

    alpha = 0.4 / w_upper.sum(axis=0).max()
    if target_ones:
        rho_star = np.ones(n)
        z = rho_star - alpha * reachable.T @ rho_star
    else:
        z = np.ones(n)
        rho_star = oracle_alpha_centrality(g.with_weights(reachable), CentralityConfig(alpha=alpha, z=z))
    return make_control_instance(g, w_upper, w_lower, rho_star, z, alpha)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def bench_graph():
    return benchmark_graph()


@pytest.fixture
def eq_instance():
    return equalization_instance()


@pytest.fixture
def two_node_graph():
    return build_graph(2, [(0, 1)])


@pytest.fixture
def path_graph():
    """Three agents in a line with asymmetric influence and a self-loop on the middle one."""

    weights = {(0, 1): 1.0, (1, 0): 0.5, (1, 2): 2.0, (2, 1): 0.25, (1, 1): 0.75}
    return build_graph(3, [(0, 1), (1, 2)], [1], weights)


@pytest.fixture
def safe_alpha():
    def pick(g, margin=0.9):
        return margin * alpha_bound(g)

    return pick


@pytest.fixture
def make_graph(rng):
    return lambda n, **kwargs: random_graph(rng, n, **kwargs)


@pytest.fixture
def make_instance(rng):
    return lambda n, **kwargs: random_control_instance(rng, n, **kwargs)
