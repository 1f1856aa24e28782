import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from alphacent.consensus import (
    ConsensusState,
    consensus_residuals,
    consensus_step,
    conservation_defects,
    correction_input_oracle,
    initial_consensus_state,
    run_consensus,
    weighted_average_oracle,
)
from alphacent.datasets import BENCHMARK_X0, benchmark_consensus_seed
from alphacent.errors import DimensionMismatch, MaxRoundsExceeded, ZeroCentralityVector
from alphacent.estimation import oracle_alpha_centrality
from alphacent.graph import CentralityConfig, make_config, perron_matrix, spectral_norm
from alphacent.trace import StopCriterion


@pytest.fixture
def muted_run(bench_graph):
    cfg = make_config(bench_graph, 0.8 / spectral_norm(bench_graph.weights), benchmark_consensus_seed())
    q = perron_matrix(bench_graph)
    state, trace = run_consensus(bench_graph, cfg, q, BENCHMARK_X0)
    return cfg, state, trace


def test_weighted_average_reached(bench_graph, muted_run):
    cfg, state, _ = muted_run
    rho = oracle_alpha_centrality(bench_graph, cfg)
    x_star = weighted_average_oracle(rho, BENCHMARK_X0)

    assert np.max(np.abs(state.x - x_star)) < 1e-6
    assert abs(x_star - BENCHMARK_X0.mean()) > 1e-3

    residuals = consensus_residuals(state, rho)
    assert residuals.keys() == {"c", "dc", "cbar", "y", "dy", "x"}
    assert residuals["cbar"] < 1e-6
    assert residuals["y"] < 1e-6
    assert residuals["x"] < 1e-6


def test_correction_sign_pattern(bench_graph, muted_run):
    cfg, state, _ = muted_run
    gamma = correction_input_oracle(oracle_alpha_centrality(bench_graph, cfg), BENCHMARK_X0)
    assert gamma[4] > 0
    assert gamma[11] < 0
    assert_allclose(state.y, gamma, atol=1e-6)


def test_conservation_every_round(muted_run):
    _, _, trace = muted_run
    assert np.max(np.abs(conservation_defects(trace))) <= 1e-12


def test_division_safeguard(muted_run):
    _, _, trace = muted_run
    cbar = trace.series("cbar")
    assert cbar[0, 4] == 0
    assert np.all(np.isfinite(trace.series("y")))

    positive = np.flatnonzero(np.all(cbar > 0, axis=1))
    assert positive.size
    assert np.all(cbar[positive[0]:] > 0)


def test_correction_held_on_zero_mean_estimate(path_graph):
    cfg = CentralityConfig(alpha=0.2, z=np.zeros(3))
    q = perron_matrix(path_graph)
    zeros = np.zeros(3)
    held = ConsensusState(
        c=zeros, dc=zeros, cbar=zeros, y=np.array([1.0, -2.0, 0.5]), dy=zeros, x=np.ones(3), x0=np.ones(3)
    )
    nxt = consensus_step(path_graph, cfg, q, held)
    assert_array_equal(nxt.y, held.y)
    assert_array_equal(nxt.dy, zeros)
    assert nxt.t == 1


def test_uniform_centrality_gives_plain_mean(rng):
    from alphacent.graph import build_graph

    g = build_graph(6, [(i, (i + 1) % 6) for i in range(6)])
    cfg = make_config(g, 0.3)
    x0 = rng.uniform(0, 10, size=6)
    state, _ = run_consensus(g, cfg, perron_matrix(g), x0)
    assert_allclose(state.x, x0.mean(), atol=1e-8)
    assert_allclose(state.y, 0.0, atol=1e-12)


def test_plain_average_without_correction(bench_graph):
    cfg = make_config(bench_graph, 0.8 / spectral_norm(bench_graph.weights), benchmark_consensus_seed())
    state, trace = run_consensus(bench_graph, cfg, perron_matrix(bench_graph), BENCHMARK_X0, correction=False)
    assert_allclose(state.x, BENCHMARK_X0.mean(), atol=1e-8)
    assert_array_equal(trace.series("y"), 0.0)


def test_zero_tolerance_hits_cap(bench_graph):
    cfg = make_config(bench_graph, 0.1)
    with pytest.raises(MaxRoundsExceeded) as info:
        run_consensus(bench_graph, cfg, perron_matrix(bench_graph), BENCHMARK_X0, stop=StopCriterion(50, 0.0))

    e = info.value
    assert e.state.t == 50
    assert e.trace.last_round == 50
    assert set(e.residuals) == {"x+dc", "dc"}


def test_initial_state(bench_graph):
    cfg = make_config(bench_graph, 0.1, benchmark_consensus_seed())
    s = initial_consensus_state(cfg, BENCHMARK_X0)
    assert_array_equal(s.c, cfg.z)
    assert_array_equal(s.cbar, cfg.z)
    assert_array_equal(s.y, 0.0)
    assert_array_equal(s.x, BENCHMARK_X0)
    with pytest.raises(DimensionMismatch):
        initial_consensus_state(cfg, BENCHMARK_X0[:5])


def test_oracles_reject_zero_centrality():
    with pytest.raises(ZeroCentralityVector):
        weighted_average_oracle(np.zeros(3), np.ones(3))
    with pytest.raises(ZeroCentralityVector):
        correction_input_oracle(np.array([1.0, -1.0, 1.0]), np.ones(3))


def test_oracle_identities(rng):
    rho = rng.uniform(0.5, 3.0, size=8)
    x0 = rng.uniform(-5, 5, size=8)
    gamma = correction_input_oracle(rho, x0)
    assert_allclose((x0 + gamma).mean(), weighted_average_oracle(rho, x0), rtol=1e-12)


def test_limits_on_random_graphs(rng, make_graph, safe_alpha):
    for _ in range(20):
        g = make_graph(int(rng.integers(3, 16)))
        cfg = make_config(g, safe_alpha(g, 0.7), rng.uniform(0.5, 2.0, size=g.n))
        x0 = rng.uniform(0.0, 10.0, size=g.n)
        state, _ = run_consensus(g, cfg, perron_matrix(g), x0)

        rho = oracle_alpha_centrality(g, cfg)
        residuals = consensus_residuals(state, rho)
        for key in ("c", "cbar", "y", "x"):
            assert residuals[key] < 1e-6, key
        assert_allclose(state.y, correction_input_oracle(rho, x0), atol=1e-6)
        assert_allclose(state.x, weighted_average_oracle(rho, x0), atol=1e-6)


def test_mean_estimate_telescopes(bench_graph, muted_run):
    cfg, _, trace = muted_run
    rho = oracle_alpha_centrality(bench_graph, cfg)
    dc_mean = trace.series("dc").mean(axis=1)
    cbar_mean = trace.series("cbar").mean(axis=1)

    assert_allclose(dc_mean[1:].sum(), rho.mean() - cfg.z.mean(), atol=1e-9)
    assert_allclose(cbar_mean - cbar_mean[0], np.cumsum(dc_mean), atol=1e-12)
