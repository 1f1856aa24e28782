import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from alphacent.cli import COMMANDS, build_parser, main
from alphacent.constants import ExitStatus
from alphacent.datasets import BENCHMARK_X0

from conftest import SCENARIOS


def read_kv(out):
    values = {}
    for line in (out / "summary.kv").read_text().splitlines():
        key, _, value = line.partition(" = ")
        values[key] = value
    return values


def floats(value):
    return np.array([float(v) for v in value.split()])


def run(command, scenario, tmp_path, *flags):
    out = tmp_path / command
    status = main([command, "--scenario", str(SCENARIOS / scenario), "--out", str(out), *flags])
    return status, out


def test_every_command_registered():
    parser = build_parser()
    for name in COMMANDS:
        args = parser.parse_args([name, "--graph", "g"])
        assert callable(args.handler)


def test_estimate_benchmark(tmp_path):
    status, out = run("estimate", "benchmark_estimation", tmp_path, "--audit-locality")
    assert status == ExitStatus.OK

    kv = read_kv(out)
    assert kv["converged"] == "True"
    assert int(kv["first_round_below_0.1"]) <= 30
    assert kv["bound_dominates"] == "True"
    assert kv["argmax"] == "5"
    assert sorted(kv["lowest"].split()) == ["1", "10", "12"]
    assert kv["simnet_bitwise"] == "True"
    assert kv["audit_violations"] == "0"
    assert (out / "audit.txt").read_text() == ""

    trace = pd.read_csv(out / "trace.csv")
    assert list(trace.columns) == ["t", "agent", "c"]
    assert (trace["t"] == 0).sum() == 15
    assert (trace[trace["t"] == 0]["c"] == 0).all()

    errors = pd.read_csv(out / "errors.csv")
    assert (errors["error"] <= errors["bound"]).all()


def test_estimate_two_node(tmp_path):
    status, out = run("estimate", "two_node", tmp_path)
    assert status == ExitStatus.OK
    assert_allclose(floats(read_kv(out)["c"]), [2.0, 2.0], atol=1e-9)


def test_estimate_is_idempotent(tmp_path):
    run("estimate", "two_node", tmp_path)
    first = (tmp_path / "estimate" / "summary.kv").read_text()
    run("estimate", "two_node", tmp_path)
    assert (tmp_path / "estimate" / "summary.kv").read_text() == first


def test_missing_graph_is_input_error(tmp_path):
    status = main(["estimate", "--graph", str(tmp_path / "missing.graph"), "--out", str(tmp_path)])
    assert status == ExitStatus.INPUT_ERROR


def test_unsafe_alpha_is_input_error(tmp_path):
    status, _ = run("estimate", "two_node", tmp_path, "--alpha", "1.5")
    assert status == ExitStatus.INPUT_ERROR


def test_estimate_round_cap(tmp_path):
    status, out = run("estimate", "benchmark_estimation", tmp_path, "--max-rounds", "5")
    assert status == ExitStatus.NOT_CONVERGED
    assert read_kv(out)["rounds"] == "5"


def test_consensus_benchmark(tmp_path):
    status, out = run("consensus", "benchmark_consensus", tmp_path, "--audit-locality")
    assert status == ExitStatus.OK

    kv = read_kv(out)
    x_star = float(kv["x_star"])
    assert abs(x_star - float(kv["plain_mean"])) > 1e-3
    assert_allclose(float(kv["plain_mean"]), BENCHMARK_X0.mean(), rtol=1e-12)
    assert float(kv["consensus_error"]) < 1e-6
    assert float(kv["residual_cbar"]) < 1e-6
    assert float(kv["conservation_defect"]) <= 1e-12
    assert_allclose(floats(kv["x"]), x_star, atol=1e-6)
    assert kv["simnet_bitwise"] == "True"

    trace = pd.read_csv(out / "trace.csv")
    assert list(trace.columns) == ["t", "agent", "c", "cbar", "y", "x"]


def test_consensus_uniform_centrality(tmp_path):
    status, out = run("consensus", "cycle_consensus", tmp_path)
    assert status == ExitStatus.OK
    assert_allclose(float(read_kv(out)["x_star"]), 3.5, rtol=1e-12)


def test_consensus_zero_tolerance(tmp_path):
    status, out = run("consensus", "cycle_consensus", tmp_path, "--tol", "0", "--max-rounds", "40")
    assert status == ExitStatus.NOT_CONVERGED
    kv = read_kv(out)
    assert kv["converged"] == "False"
    assert kv["rounds"] == "40"
    assert (out / "trace.csv").exists()


def test_consensus_seeded_x0(tmp_path):
    argv = ["consensus", "--graph", str(SCENARIOS / "cycle.graph"), "--alpha", "0.3", "--seed", "11"]
    assert main([*argv, "--out", str(tmp_path / "a")]) == ExitStatus.OK
    assert main([*argv, "--out", str(tmp_path / "b")]) == ExitStatus.OK
    assert read_kv(tmp_path / "a")["x_star"] == read_kv(tmp_path / "b")["x_star"]


def test_control_equalization(tmp_path):
    status, out = run("control", "equalization", tmp_path, "--audit-locality")
    assert status == ExitStatus.OK

    kv = read_kv(out)
    assert kv["verdict"] == "feasible"
    assert abs(float(kv["objective"]) - 4.6742) < 1e-3
    assert float(kv["residual"]) < 1e-8
    assert set(kv["lower_saturated"].split()) >= {"2-2", "3-3"}
    assert kv["exchange_bitwise"] == "True"
    assert kv["audit_violations"] == "0"

    solution = pd.read_csv(out / "solution.csv")
    assert list(solution.columns) == ["i", "j", "w_old", "x_star", "w_new", "w_lower", "w_upper"]
    assert len(solution) == 18
    assert_allclose(solution["w_new"] - solution["w_old"], solution["x_star"], atol=1e-12)


@pytest.mark.parametrize("solver", ["breakpoints", "enumeration"])
def test_control_protection(tmp_path, solver):
    status, out = run("control", "protection", tmp_path, "--solver", solver)
    assert status == ExitStatus.OK
    kv = read_kv(out)
    assert abs(float(kv["objective"]) - 4.6742) < 1e-3
    assert float(kv["spread_after"]) < 1e-8


def test_control_zero_adjustment(tmp_path):
    status, out = run("control", "zero_adjustment", tmp_path)
    assert status == ExitStatus.OK
    assert float(read_kv(out)["objective"]) == 0


def test_control_infeasible(tmp_path):
    status, out = run("control", "infeasible", tmp_path)
    assert status == ExitStatus.INFEASIBLE
    lines = (out / "verdict.txt").read_text().splitlines()
    assert lines[0] == "infeasible"
    assert lines[1:] == ["row 1 upper 1.5", "row 2 upper 1.5"]
    assert read_kv(out)["violated_rows"] == "1 2"
    assert not (out / "solution.csv").exists()


def test_control_without_bounds_is_input_error(tmp_path):
    status = main(["control", "--graph", str(SCENARIOS / "two_node.graph"), "--out", str(tmp_path)])
    assert status == ExitStatus.INPUT_ERROR


def test_consensus_without_correction(tmp_path):
    status, out = run("consensus", "cycle_consensus", tmp_path, "--no-correction")
    assert status == ExitStatus.OK

    kv = read_kv(out)
    assert kv["correction"] == "False"
    assert kv["x_star"] == kv["plain_mean"]
    assert float(kv["consensus_error"]) < 1e-6
    for key in ("gamma", "residual_y", "residual_dy", "residual_x"):
        assert key not in kv
    assert "residual_cbar" in kv


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    status = main(["estimate", "--scenario", str(SCENARIOS / "two_node"), "--out", str(blocker / "run")])
    assert status == ExitStatus.IO_ERROR
