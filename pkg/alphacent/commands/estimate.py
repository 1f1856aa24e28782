import argparse
import logging
from typing import Optional

import numpy as np
import pandas as pd

from .. import config
from ..constants import ExitStatus
from ..estimation import error_bound, error_bound_params, estimation_errors, oracle_alpha_centrality, run_estimation
from ..graph import make_config
from ..simnet.protocols import EstimateProtocol
from ..trace import StopCriterion
from .common import (
    audited_run,
    check_audit,
    common_arguments,
    load_graph,
    load_spec,
    pick_alpha,
    replay_matches,
    seed_vector,
    stop_criterion,
    vector_table,
    write_summary,
)

log = logging.getLogger(__name__)

# error level reported as a milestone in the summary
MILESTONE = 0.1


def _first_below(errors: np.ndarray, level: float) -> Optional[int]:
    below = np.flatnonzero(errors < level)
    return int(below[0]) if below.size else None


def cmd_estimate(args: argparse.Namespace) -> ExitStatus:
    """Runs the centrality estimation and compares it against the direct solve.

    Writes ``trace.csv`` (``t, agent, c``), ``errors.csv`` (``t, error, bound``) and the summary files.
    """

    spec = load_spec(args)
    gf, g = load_graph(spec)
    cfg = make_config(g, pick_alpha(spec, g, fallback=gf.alpha), seed_vector(spec, gf.z, n=g.n))

    state, trace = run_estimation(g, cfg, c0=spec.c0, stop=stop_criterion(spec))
    rho = oracle_alpha_centrality(g, cfg)
    errors = estimation_errors(trace, rho)

    params = error_bound_params(g, cfg, trace.rounds[0]["c"])
    if params is None:
        bounds = np.full(len(errors), np.nan)
    else:
        bounds = np.array([error_bound(params, t) for t in range(len(errors))])

    out = spec.out or config.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out / "trace.csv")
    pd.DataFrame({"t": np.arange(len(errors)), "error": errors, "bound": bounds}).to_csv(
        out / "errors.csv", index=False, float_format=f"%.{config.CSV_DIGITS}g"
    )

    order = np.argsort(state.c, kind="stable")
    first = _first_below(errors, MILESTONE)
    values = {
        "rounds": state.t,
        "converged": state.converged,
        "residual": state.residual,
        "alpha": cfg.alpha,
        "final_error": errors[-1],
        "first_round_below_0.1": "none" if first is None else first,
        "bound_dominates": "n/a" if params is None else bool(np.all(errors <= bounds)),
        "kappa": "n/a" if params is None else params.kappa,
        "argmax": int(order[-1]) + 1,
        "lowest": [int(i) + 1 for i in order[:3]],
        "c": state.c,
        "rho": rho,
    }

    report = None
    if args.audit_locality:
        stop = StopCriterion(max_rounds=state.t, tol=trace.params["tol"])
        _, replay, report = audited_run(out, g, EstimateProtocol(cfg, spec.c0), stop=stop, parallel=args.parallel)
        matches = replay_matches(trace, replay, ("c",))
        values["audit_violations"] = len(report.violations)
        values["simnet_bitwise"] = matches

    write_summary(out, "Centrality estimation", vector_table(["c", "rho"], c=state.c, rho=rho), values)
    if report is not None:
        check_audit(report, matches)

    if not state.converged:
        log.warning(f"Estimation did not settle within {state.t} rounds")
        return ExitStatus.NOT_CONVERGED
    return ExitStatus.OK


def setup(subparsers: argparse._SubParsersAction):
    parser = subparsers.add_parser(
        "estimate",
        parents=[common_arguments()],
        help="estimate every agent's alpha-centrality by local iteration",
    )
    parser.set_defaults(handler=cmd_estimate)
