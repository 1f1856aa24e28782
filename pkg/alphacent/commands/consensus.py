import argparse
import logging

import numpy as np

from .. import config
from ..consensus import (
    consensus_residuals,
    conservation_defects,
    correction_input_oracle,
    run_consensus,
    weighted_average_oracle,
)
from ..constants import ExitStatus
from ..errors import MaxRoundsExceeded
from ..estimation import oracle_alpha_centrality
from ..graph import make_config, perron_matrix
from ..helpers.utils import exact_sum
from ..simnet.protocols import ConsensusProtocol
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

PANELS = ("c", "cbar", "y", "x")

# range of generated initial values when the scenario gives no x0
X0_RANGE = (0.0, 30.0)

# residuals measured against the corrected cascade's limits
CORRECTED_LIMITS = ("y", "dy", "x")


def cmd_consensus(args: argparse.Namespace) -> ExitStatus:
    """Runs the influence-weighted consensus cascade.

    Writes ``trace.csv`` with the ``c``, ``cbar``, ``y`` and ``x`` panels and the summary files. A run that
    hits its round cap still writes everything it recorded.
    """

    spec = load_spec(args)
    if args.no_correction:
        spec.correction = False
    gf, g = load_graph(spec)
    cfg = make_config(g, pick_alpha(spec, g, fallback=gf.alpha), seed_vector(spec, gf.z, n=g.n))
    perron = perron_matrix(g, spec.epsilon)

    if spec.x0 is not None:
        x0 = spec.x0
    else:
        x0 = np.random.default_rng(spec.seed).uniform(*X0_RANGE, size=g.n)
        log.info(f"Generated x0 with seed {spec.seed}")

    converged = True
    try:
        state, trace = run_consensus(g, cfg, perron, x0, stop=stop_criterion(spec), correction=spec.correction)
    except MaxRoundsExceeded as e:
        converged = False
        state, trace = e.state, e.trace

    rho = oracle_alpha_centrality(g, cfg)
    residuals = consensus_residuals(state, rho)
    if not spec.correction:
        # y stays at zero and x heads for the plain mean, so these limits do not apply
        residuals = {k: v for k, v in residuals.items() if k not in CORRECTED_LIMITS}
    defects = conservation_defects(trace)

    out = spec.out or config.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out / "trace.csv", columns=PANELS)

    x_star = weighted_average_oracle(rho, x0) if spec.correction else exact_sum(list(x0)) / g.n
    values = {
        "rounds": state.t,
        "converged": converged,
        "correction": spec.correction,
        "alpha": cfg.alpha,
        "epsilon": perron.epsilon,
        "lambda2": perron.lambda2,
        "x_star": x_star,
        "plain_mean": exact_sum(list(x0)) / g.n,
        "consensus_error": float(np.max(np.abs(state.x - x_star))),
        **{f"residual_{k}": v for k, v in residuals.items()},
        "conservation_defect": float(np.max(np.abs(defects))) if defects.size else 0.0,
        "x": state.x,
    }
    if spec.correction:
        values["gamma"] = correction_input_oracle(rho, x0)

    report = None
    if args.audit_locality:
        stop = StopCriterion(max_rounds=state.t, tol=trace.params["tol"])
        protocol = ConsensusProtocol(cfg, x0, correction=spec.correction)
        _, replay, report = audited_run(out, g, protocol, stop=stop, perron=perron, parallel=args.parallel)
        matches = replay_matches(trace, replay, trace.observables)
        values["audit_violations"] = len(report.violations)
        values["simnet_bitwise"] = matches

    table = vector_table(PANELS, **{name: getattr(state, name) for name in PANELS})
    write_summary(out, "Weighted consensus", table, values)
    if report is not None:
        check_audit(report, matches)

    if not converged:
        log.warning(f"Consensus stopped at the cap of {state.t} rounds")
        return ExitStatus.NOT_CONVERGED
    return ExitStatus.OK


def setup(subparsers: argparse._SubParsersAction):
    parser = subparsers.add_parser(
        "consensus",
        parents=[common_arguments()],
        help="reach the centrality-weighted average of the agents' initial values",
    )
    parser.add_argument("--no-correction", action="store_true", help="plain average consensus")
    parser.set_defaults(handler=cmd_consensus)
