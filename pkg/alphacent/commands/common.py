from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..constants import AlphaMode
from ..errors import ProtocolError, ScenarioError
from ..graph import InfluenceGraph, PerronMatrix, distributed_alpha_agreement, resolve_alpha
from ..helpers.converters import GraphFile, ScenarioSpec, read_scenario
from ..helpers.formats import key_values, render_table
from ..simnet.audit import AuditReport, locality_audit
from ..simnet.engine import SimNetwork
from ..simnet.protocols import Protocol
from ..trace import RoundTrace, StopCriterion


__all__ = [
    "common_arguments",
    "load_spec",
    "load_graph",
    "pick_alpha",
    "stop_criterion",
    "seed_vector",
    "write_summary",
    "vector_table",
    "audited_run",
    "replay_matches",
    "check_audit",
]

log = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.9


def common_arguments() -> argparse.ArgumentParser:
    """Flags shared by every sub-command."""

    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--graph", type=Path, help="graph file (overrides the scenario's `graph`)")
    parser.add_argument("--scenario", type=Path, help="scenario file")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: ./out)")

    alpha = parser.add_mutually_exclusive_group()
    alpha.add_argument("--alpha", type=float, help="explicit attenuation")
    alpha.add_argument("--alpha-margin", type=float, help="fraction of the largest safe alpha")

    parser.add_argument("--tol", type=float, help="stopping tolerance")
    parser.add_argument("--max-rounds", type=int, help="round cap")
    parser.add_argument("--parallel", action="store_true", help="run independent work concurrently")
    parser.add_argument("--audit-locality", action="store_true", help="replay on the simulator and audit reads")
    parser.add_argument("--seed", type=int, help="seed for generated inputs")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return parser


def load_spec(args: argparse.Namespace) -> ScenarioSpec:
    spec = read_scenario(args.scenario) if args.scenario else ScenarioSpec()
    if args.alpha is not None:
        spec.alpha_margin = None
    if args.alpha_margin is not None:
        spec.alpha = None

    return spec.merge(
        graph=args.graph,
        out=args.out,
        alpha=args.alpha,
        alpha_margin=args.alpha_margin,
        tol=args.tol,
        max_rounds=args.max_rounds,
        seed=args.seed,
    )


def load_graph(spec: ScenarioSpec) -> Tuple[GraphFile, InfluenceGraph]:
    gf = spec.load_graph_file()
    g = gf.to_graph()
    log.info(f"Loaded {g!r} from {gf.path}")
    return gf, g


def pick_alpha(spec: ScenarioSpec, g: InfluenceGraph, fallback: Optional[float] = None) -> float:
    """Explicit alpha, else a margin of the bound chosen by ``alpha-mode``, else ``fallback``.

    In bound-fraction mode the agents agree on alpha by max-consensus on the simulator.
    """

    if spec.alpha is not None:
        return spec.alpha
    if spec.alpha_margin is None and fallback is not None:
        return fallback

    margin = DEFAULT_MARGIN if spec.alpha_margin is None else spec.alpha_margin
    mode = spec.alpha_mode or AlphaMode.BOUND_FRACTION
    if mode is AlphaMode.BOUND_FRACTION:
        return distributed_alpha_agreement(SimNetwork(g), g, margin)
    if mode is AlphaMode.EXPLICIT:
        raise ScenarioError("alpha-mode explicit needs an `alpha` value.", path=spec.path)
    return resolve_alpha(g, mode, margin)


def stop_criterion(spec: ScenarioSpec) -> StopCriterion:
    return StopCriterion(max_rounds=spec.max_rounds, tol=spec.tol)


def seed_vector(spec: ScenarioSpec, *candidates: Optional[np.ndarray], n: int) -> np.ndarray:
    for z in (spec.z, *candidates):
        if z is not None:
            return z
    return np.ones(n)


def vector_table(columns: Iterable[str], **vectors: np.ndarray) -> pd.DataFrame:
    columns = list(columns)
    n = len(vectors[columns[0]])
    return pd.DataFrame({"agent": np.arange(1, n + 1), **{c: vectors[c] for c in columns}})


def write_summary(out: Path, title: str, table: Optional[pd.DataFrame], values: Mapping[str, Any]) -> Dict[str, Path]:
    """Writes ``summary.txt`` for people and ``summary.kv`` for scripts."""

    out.mkdir(parents=True, exist_ok=True)
    text = [title, "=" * len(title), ""]
    if table is not None:
        text += [render_table(table), ""]
    text.append(key_values(values))

    paths = {"summary": out / "summary.txt", "kv": out / "summary.kv"}
    paths["summary"].write_text("\n".join(text))
    paths["kv"].write_text(key_values(values))
    log.info(f"Wrote {paths['summary']} and {paths['kv']}")
    return paths


def audited_run(
    out: Path,
    g: InfluenceGraph,
    protocol: Protocol,
    stop: Optional[StopCriterion] = None,
    perron: Optional[PerronMatrix] = None,
    parallel: bool = False,
) -> Tuple[SimNetwork, RoundTrace, AuditReport]:
    """Runs ``protocol`` on the simulator with read instrumentation and writes ``audit.txt``."""

    net = SimNetwork(g, perron=perron, parallel=parallel)
    trace = net.run(protocol, stop=stop, audit=True)
    report = locality_audit(trace, g)

    out.mkdir(parents=True, exist_ok=True)
    (out / "audit.txt").write_text(report.render())
    log.info(f"Audited {report.reads} reads, {len(report.violations)} outside the graph")
    return net, trace, report


def replay_matches(expected: RoundTrace, replay: RoundTrace, observables: Sequence[str]) -> bool:
    if len(expected) != len(replay):
        return False
    return all(np.array_equal(expected.series(name), replay.series(name)) for name in observables)


def check_audit(report: AuditReport, matches: bool):
    if not report.clean:
        raise ProtocolError(f"Locality audit found {len(report.violations)} reads across non-edges.")
    if not matches:
        raise ProtocolError("The simulator run differs from the centralized iteration.")
