import argparse
import logging
from typing import List

import numpy as np
import pandas as pd

from .. import config
from ..constants import ExitStatus, Saturation, SolverKind, TargetMode
from ..control.models import ControlInstance, ControlSolution, FeasibilityReport
from ..control.solver import attack_protection, centrality_spread, solve_control, solve_local
from ..errors import InfeasibleTarget, ScenarioError
from ..simnet.protocols import ControlExchangeProtocol
from .common import audited_run, check_audit, common_arguments, load_graph, load_spec, pick_alpha, write_summary

log = logging.getLogger(__name__)


def _solution_frame(inst: ControlInstance, solution: ControlSolution) -> pd.DataFrame:
    rows, cols = np.nonzero(inst.g.support)
    return pd.DataFrame(
        {
            "i": rows + 1,
            "j": cols + 1,
            "w_old": inst.g.weights[rows, cols],
            "x_star": solution.x_star[rows, cols],
            "w_new": solution.w_new[rows, cols],
            "w_lower": inst.w_lower[rows, cols],
            "w_upper": inst.w_upper[rows, cols],
        }
    )


def _saturated(solution: ControlSolution, label: Saturation) -> List[str]:
    return [f"{j + 1}-{i + 1}" for i, partition in enumerate(solution.partitions) for j in partition[label]]


def _write_infeasible(out, report: FeasibilityReport) -> ExitStatus:
    out.mkdir(parents=True, exist_ok=True)
    (out / "verdict.txt").write_text("\n".join(["infeasible", *report.lines()]) + "\n")
    values = {
        "verdict": "infeasible",
        "violated_rows": sorted({v.node + 1 for v in report.violations}),
    }
    write_summary(out, "Centrality control", None, values)
    log.warning(f"Target unreachable; violated rows {values['violated_rows']}")
    return ExitStatus.INFEASIBLE


def cmd_control(args: argparse.Namespace) -> ExitStatus:
    """Solves the minimum-effort weight adjustment that reaches the target centrality.

    With a ``target`` in the scenario the target is a uniform centrality (attack protection), otherwise
    the graph file's ``rho*``. Writes ``solution.csv`` with one row per adjustable weight ``w_ij``.
    """

    spec = load_spec(args)
    gf, g = load_graph(spec)
    if not gf.has_control_data:
        raise ScenarioError("The graph file carries no bounds or target.", path=gf.path)

    inst = gf.to_control_instance(g, z=spec.z, alpha=pick_alpha(spec, g, fallback=gf.alpha))
    solver = SolverKind(args.solver) if args.solver else spec.solver
    out = spec.out or config.OUTPUT_DIR

    solved = inst
    try:
        if spec.target is None:
            solution = solve_control(inst, solver=solver, parallel=args.parallel)
        else:
            solution = attack_protection(inst, spec.target, spec.level, solver=solver, parallel=args.parallel)
            level = 1.0 if spec.target is TargetMode.ONES else spec.level
            solved = inst.with_target(np.full(inst.n, float(level)))
    except InfeasibleTarget as e:
        return _write_infeasible(out, e.report)

    out.mkdir(parents=True, exist_ok=True)
    _solution_frame(solved, solution).to_csv(
        out / "solution.csv", index=False, float_format=f"%.{config.CSV_DIGITS}g"
    )

    before, after = solution.spread_before, solution.spread_after
    if before is None:
        before, after = centrality_spread(inst, g.weights), centrality_spread(inst, solution.w_new)

    values = {
        "verdict": "feasible",
        "solver": solver.value,
        "alpha": inst.alpha,
        "objective": solution.objective,
        "residual": solution.residual,
        "lambda_star": solution.lambda_star,
        "spread_before": before,
        "spread_after": after,
        "lower_saturated": _saturated(solution, Saturation.LOWER),
        "upper_saturated": _saturated(solution, Saturation.UPPER),
    }

    report = None
    if args.audit_locality:
        net, _, report = audited_run(out, g, ControlExchangeProtocol(solved), parallel=args.parallel)
        problems = ControlExchangeProtocol.local_problems(net.agents)
        lambdas = np.array([solve_local(lp, solver).lambda_ for lp in problems])
        matches = np.array_equal(lambdas, solution.lambda_star)
        values["audit_violations"] = len(report.violations)
        values["exchange_bitwise"] = matches

    write_summary(out, "Centrality control", None, values)
    if report is not None:
        check_audit(report, matches)
    return ExitStatus.OK


def setup(subparsers: argparse._SubParsersAction):
    parser = subparsers.add_parser(
        "control",
        parents=[common_arguments()],
        help="adjust the influence weights so that every agent reaches its target centrality",
    )
    parser.add_argument("--solver", choices=[k.value for k in SolverKind], help="per-node solver")
    parser.set_defaults(handler=cmd_control)
