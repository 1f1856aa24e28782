import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from alphacent.datasets import EQUALIZATION_ALPHA, EQUALIZATION_CENTRALITY, benchmark_config, equalization_graph
from alphacent.errors import DimensionMismatch, InvalidConfiguration, KappaNotLessThanOne, SingularSystem
from alphacent.estimation import (
    ErrorBoundParams,
    alpha_centrality_series,
    default_max_rounds,
    error_bound,
    error_bound_params,
    estimation_closed_form,
    estimation_errors,
    estimation_increment,
    estimation_step,
    fit_alpha,
    oracle_alpha_centrality,
    oracle_katz_centrality,
    run_estimation,
)
from alphacent.graph import CentralityConfig, build_graph, make_config
from alphacent.trace import StopCriterion


def test_two_node_fixed_point(two_node_graph):
    cfg = make_config(two_node_graph, 0.5)
    state, trace = run_estimation(two_node_graph, cfg)
    assert state.converged
    assert_allclose(state.c, [2.0, 2.0], atol=1e-9)
    assert_allclose(oracle_alpha_centrality(two_node_graph, cfg), [2.0, 2.0], rtol=1e-15)
    assert len(trace) == state.t + 1


def test_step_uses_incoming_weights(path_graph):
    cfg = make_config(path_graph, 0.2, [1.0, 0.0, 2.0])
    c = np.array([1.0, 2.0, 3.0])
    # c_1 gets w_01 c_0 + w_11 c_1 + w_21 c_2
    expected = 0.2 * np.array([0.5 * 2.0, 1.0 * 1.0 + 0.75 * 2.0 + 0.25 * 3.0, 2.0 * 2.0]) + cfg.z
    assert_allclose(estimation_step(path_graph, cfg, c), expected, rtol=1e-15)


def test_step_rejects_wrong_length(path_graph):
    cfg = make_config(path_graph, 0.2)
    with pytest.raises(DimensionMismatch):
        estimation_step(path_graph, cfg, [1.0, 2.0])


def test_oracle_equivalence(rng, make_graph, safe_alpha):
    for _ in range(100):
        g = make_graph(int(rng.integers(3, 21)))
        cfg = make_config(g, safe_alpha(g))
        state, _ = run_estimation(g, cfg)
        assert state.converged
        assert np.max(np.abs(state.c - oracle_alpha_centrality(g, cfg))) < 1e-8


def test_katz_identity(rng, make_graph, safe_alpha):
    for _ in range(50):
        g = make_graph(int(rng.integers(3, 21)))
        alpha = safe_alpha(g)
        rho = oracle_alpha_centrality(g, make_config(g, alpha))
        assert_allclose(oracle_katz_centrality(g, alpha), rho - 1.0, atol=1e-12)


def test_katz_rejects_unsafe_alpha(two_node_graph):
    with pytest.raises(InvalidConfiguration):
        oracle_katz_centrality(two_node_graph, 1.0)


def test_singular_system(two_node_graph):
    with pytest.raises(SingularSystem):
        oracle_alpha_centrality(two_node_graph, CentralityConfig(alpha=1.0, z=np.ones(2)))


def test_trace_matches_closed_form(path_graph, rng):
    cfg = make_config(path_graph, 0.25)
    c0 = rng.uniform(0, 5, size=3)
    _, trace = run_estimation(path_graph, cfg, c0=c0, stop=StopCriterion(max_rounds=12, tol=0.0))
    for t, snapshot in enumerate(trace.rounds):
        assert_allclose(snapshot["c"], estimation_closed_form(path_graph, cfg, c0, t), rtol=1e-12)


def test_series_reaches_oracle(bench_graph):
    cfg = benchmark_config(bench_graph)
    rho = oracle_alpha_centrality(bench_graph, cfg)
    assert_allclose(alpha_centrality_series(bench_graph, cfg, 400), rho, rtol=1e-12)
    assert_array_equal(alpha_centrality_series(bench_graph, cfg, 1), cfg.z)


def test_monotone_growth_from_seed(path_graph):
    cfg = make_config(path_graph, 0.3)
    _, trace = run_estimation(path_graph, cfg)
    c = trace.series("c")
    assert np.all(np.diff(c, axis=0) >= 0)
    for t in range(1, len(c) - 1):
        assert_allclose(estimation_increment(path_graph, cfg, c[t], c[t] - c[t - 1]), c[t + 1], rtol=1e-12)


def test_round_cap(bench_graph):
    state, trace = run_estimation(bench_graph, benchmark_config(bench_graph), stop=StopCriterion(max_rounds=3))
    assert not state.converged
    assert state.t == 3
    assert trace.last_round == 3


def test_benchmark_estimation(bench_graph):
    cfg = benchmark_config(bench_graph)
    c0 = np.zeros(15)
    state, trace = run_estimation(bench_graph, cfg, c0=c0)
    rho = oracle_alpha_centrality(bench_graph, cfg)
    errors = estimation_errors(trace, rho)

    params = error_bound_params(bench_graph, cfg, c0)
    assert params.norm == "2"
    assert_allclose(params.kappa, 0.8)
    bounds = np.array([error_bound(params, t) for t in range(len(errors))])
    assert np.all(errors <= bounds)

    assert int(np.flatnonzero(errors < 0.1)[0]) <= 30
    assert int(np.argmax(state.c)) == 4
    assert set(np.argsort(state.c)[:3]) == {0, 9, 11}


def test_bound_params_on_asymmetric_weights(path_graph):
    cfg = make_config(path_graph, 0.2)
    params = error_bound_params(path_graph, cfg, cfg.z)
    assert params.norm in ("1", "2", "inf")
    assert 0 < params.kappa < 1
    assert params.gamma >= 1


def test_bound_params_unavailable(path_graph):
    # alpha * rho(W) < 1 here while every induced norm of W^T exceeds 1 / alpha
    cfg = make_config(path_graph, 0.6)
    assert error_bound_params(path_graph, cfg, cfg.z) is None
    assert default_max_rounds(None, 1e-10) > 0


def test_error_bound_rejects_kappa():
    with pytest.raises(KappaNotLessThanOne):
        error_bound(ErrorBoundParams(kappa=1.0, gamma=1.0, m0=1.0), 3)


def test_default_max_rounds():
    assert default_max_rounds(0.5, 1e-10) == 340
    assert default_max_rounds(0.001, 0.5) == 10


def test_fit_alpha_recovers_equalization_alpha():
    alpha, residual = fit_alpha(equalization_graph(), EQUALIZATION_CENTRALITY, np.ones(6))
    assert abs(alpha - EQUALIZATION_ALPHA) < 1e-3
    assert residual < 1e-2


def test_centrality_is_a_fixed_point(rng, make_graph, safe_alpha):
    for _ in range(50):
        g = make_graph(int(rng.integers(3, 21)))
        cfg = make_config(g, safe_alpha(g), rng.uniform(0.5, 2.0, size=g.n))
        rho = oracle_alpha_centrality(g, cfg)
        assert_allclose(estimation_step(g, cfg, rho), rho, rtol=1e-12)


def test_centrality_measures_outgoing_influence():
    # agent 0 weighs on agent 1 and nothing weighs on agent 0
    g = build_graph(2, [(0, 1)], weights={(1, 0): 1.2})
    cfg = make_config(g, 0.5)
    rho = oracle_alpha_centrality(g, cfg)
    assert_allclose(rho, [1.6, 1.0], rtol=1e-15)
    state, _ = run_estimation(g, cfg)
    assert_allclose(state.c, rho, rtol=1e-15)
