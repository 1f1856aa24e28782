import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from alphacent.constants import AlphaMode, SolverKind, TargetMode
from alphacent.datasets import BENCHMARK_X0, EQUALIZATION_WEIGHTS, benchmark_graph, equalization_instance
from alphacent.errors import ScenarioError
from alphacent.helpers.converters import parse_graph_text, parse_scenario_text, read_graph_file, read_scenario

from conftest import SCENARIOS


def test_benchmark_graph_file_matches_dataset():
    g = read_graph_file(SCENARIOS / "benchmark.graph").to_graph()
    reference = benchmark_graph()
    assert g.edges == reference.edges
    assert_array_equal(g.weights, reference.weights)


def test_equalization_graph_file_matches_dataset():
    gf = read_graph_file(SCENARIOS / "equalization.graph")
    inst = gf.to_control_instance()
    reference = equalization_instance()

    assert gf.has_control_data
    assert_array_equal(inst.g.weights, reference.g.weights)
    assert_array_equal(inst.w_upper, reference.w_upper)
    assert_array_equal(inst.w_lower, reference.w_lower)
    assert_allclose(inst.z, reference.z, rtol=1e-15)
    assert inst.alpha == reference.alpha
    assert len(EQUALIZATION_WEIGHTS) == len(inst.g.edges) * 2 + len(inst.g.self_loops)


def test_records_are_one_based():
    gf = parse_graph_text("n 3\ne 1 2 0.5 0.25\ne 2 3\ns 3 2.0\n")
    assert gf.edges == [(0, 1), (1, 2)]
    assert gf.weights[0, 1] == 0.5
    assert gf.weights[1, 0] == 0.25
    assert gf.weights[1, 2] == 1.0
    assert gf.weights[2, 2] == 2.0


def test_entry_bounds_and_pinned_weights():
    text = """
    n 2
    e 1 2 1.0 1.0
    u 1 2 3.0
    l 1 2 0.5   # only w_12 may move
    rho* 2 2
    z 1 1
    alpha 0.5
    """
    gf = parse_graph_text(text)
    g = gf.to_graph()
    w_upper, w_lower = gf.bound_matrices(g)
    assert w_upper[0, 1] == 3.0
    assert w_lower[0, 1] == 0.5
    assert w_upper[1, 0] == w_lower[1, 0] == 1.0


def test_self_loop_bounds():
    gf = parse_graph_text("n 2\ne 1 2\ns 2 1.0\nbounds 0.5 2\nus 2 4\nls 2 0.25\n")
    w_upper, w_lower = gf.bound_matrices(gf.to_graph())
    assert w_upper[1, 1] == 4.0
    assert w_lower[1, 1] == 0.25
    assert w_upper[0, 1] == 2.0


@pytest.mark.parametrize(
    "text, line",
    [
        ("e 1 2\n", 1),
        ("n 2\ne 1 3\n", 2),
        ("n 2\ne 1 2\nq 1\n", 3),
        ("n 2\ne 1 2\nrho* 1\n", 3),
        ("n 2\n\ne 1 2 x\n", 3),
    ],
)
def test_graph_file_errors_carry_line(text, line):
    with pytest.raises(ScenarioError) as info:
        parse_graph_text(text, path="bad.graph")
    assert info.value.line == line
    assert str(info.value).startswith(f"bad.graph:line {line}:")


def test_graph_errors_become_scenario_errors():
    with pytest.raises(ScenarioError):
        parse_graph_text("n 3\ne 1 2\n").to_graph()


def test_control_data_required():
    gf = parse_graph_text("n 2\ne 1 2\nbounds 0.5 2\n")
    with pytest.raises(ScenarioError, match="rho\\*"):
        gf.to_control_instance()


def test_missing_file():
    with pytest.raises(ScenarioError):
        read_graph_file(SCENARIOS / "nope.graph")
    with pytest.raises(ScenarioError):
        read_scenario(SCENARIOS / "nope")


def test_scenario_keys(tmp_path):
    text = """
    graph benchmark.graph
    alpha-mode spectral-fraction
    alpha-margin 0.8
    epsilon 0.1
    tol 1e-8
    max-rounds 500
    seed 7
    correction off
    solver enumeration
    target uniform
    level 2.5
    """
    spec = parse_scenario_text(text, path="s", base=tmp_path)
    assert spec.graph == tmp_path / "benchmark.graph"
    assert spec.alpha_mode is AlphaMode.SPECTRAL_FRACTION
    assert spec.alpha_margin == 0.8
    assert spec.epsilon == 0.1
    assert spec.tol == 1e-8
    assert spec.max_rounds == 500
    assert spec.seed == 7
    assert spec.correction is False
    assert spec.solver is SolverKind.ENUMERATION
    assert spec.target is TargetMode.UNIFORM
    assert spec.level == 2.5


def test_shipped_consensus_scenario():
    spec = read_scenario(SCENARIOS / "benchmark_consensus")
    assert spec.graph == SCENARIOS / "benchmark.graph"
    assert_array_equal(spec.x0, BENCHMARK_X0)
    assert spec.z[4] == 0
    assert np.count_nonzero(spec.z) == 14


def test_merge_ignores_missing_overrides():
    spec = parse_scenario_text("alpha 0.1\ntol 1e-6\n")
    merged = spec.merge(alpha=None, tol=1e-9, unknown=3)
    assert merged.alpha == 0.1
    assert merged.tol == 1e-9
    assert spec.tol == 1e-6


@pytest.mark.parametrize("text", ["bogus 1\n", "alpha\n", "alpha-mode sideways\n", "correction maybe\n"])
def test_bad_scenarios(text):
    with pytest.raises(ScenarioError):
        parse_scenario_text(text, path="s")
