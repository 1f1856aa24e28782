from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import repeat
from typing import List, Optional, Sequence

import numpy as np

from .. import config
from ..constants import SolverKind, TargetMode
from ..errors import ConstraintResidualTooLarge, InfeasibleTarget, InvalidConfiguration, InvalidControlInstance
from ..estimation import oracle_alpha_centrality
from ..graph import CentralityConfig
from ..helpers.utils import exact_dot, exact_matvec, exact_sum
from .breakpoints import breakpoint_local
from .enumeration import enumerate_local
from .local import residual_scale, tolerance
from .models import ControlInstance, ControlSolution, FeasibilityReport, LocalProblem, NodeSolution, RowViolation


__all__ = [
    "feasibility_check",
    "solve_local",
    "assemble_solution",
    "constraint_residual",
    "centrality_spread",
    "solve_control",
    "attack_protection",
]

log = logging.getLogger(__name__)


def feasibility_check(inst: ControlInstance) -> FeasibilityReport:
    """Checks ``(I - alpha W_upper^T) rho_star <= z`` and ``(I - alpha W_lower^T) rho_star >= z`` row by row.

    Amounts are reported in the units of ``z``.
    """

    violations = []
    for i in range(inst.n):
        lp = LocalProblem.from_instance(inst, i)
        tol = tolerance(residual_scale(lp))
        at_upper = exact_dot(lp.w_upper, lp.rho) - lp.demand
        at_lower = exact_dot(lp.w_lower, lp.rho) - lp.demand
        if at_upper < -tol:
            violations.append(RowViolation(node=i, bound="upper", amount=-at_upper * inst.alpha))
        if at_lower > tol:
            violations.append(RowViolation(node=i, bound="lower", amount=at_lower * inst.alpha))

    if violations:
        log.info(f"Target unreachable at rows {[v.node + 1 for v in violations]}")
    return FeasibilityReport(violations)


def solve_local(lp: LocalProblem, kind: SolverKind = SolverKind.BREAKPOINTS) -> NodeSolution:
    if kind is SolverKind.ENUMERATION:
        return enumerate_local(lp)
    return breakpoint_local(lp)


def constraint_residual(inst: ControlInstance, weights: np.ndarray) -> float:
    """``||(I - alpha weights^T) rho_star - z||_inf``."""

    lhs = inst.rho_star - inst.alpha * exact_matvec(np.asarray(weights).T, inst.rho_star)
    return float(np.max(np.abs(lhs - inst.z)))


def assemble_solution(inst: ControlInstance, results: Sequence[NodeSolution]) -> ControlSolution:
    """Stacks the per-node columns into ``X*`` and checks the centrality constraint.

    Raises
    ------
    ConstraintResidualTooLarge
        The stacked solution misses the target by more than ``config.CONSTRAINT_TOL``.
    """

    by_node = {r.node: r for r in results}
    if sorted(by_node) != list(range(inst.n)):
        raise InvalidControlInstance("Every node needs exactly one local solution.")

    w_new = np.array(inst.g.weights, dtype=float)
    lambda_star = np.zeros(inst.n)
    partitions = []
    for i in range(inst.n):
        r = by_node[i]
        w_new[list(r.neighborhood), i] = r.proposal
        lambda_star[i] = r.lambda_
        partitions.append(r.partition)

    if np.any(w_new < inst.w_lower) or np.any(w_new > inst.w_upper):
        raise InvalidControlInstance("Adjusted weights left their bounds.")

    x_star = w_new - inst.g.weights
    residual = constraint_residual(inst, w_new)
    if residual > config.CONSTRAINT_TOL:
        raise ConstraintResidualTooLarge(f"{ConstraintResidualTooLarge.message} (residual {residual:.3e})")

    objective = 0.5 * exact_sum((x_star**2).ravel().tolist())
    solver = results[0].solver if results else None
    log.info(f"Assembled adjustment: objective {objective:.15g}, constraint residual {residual:.3e}")

    for array in (x_star, w_new, lambda_star):
        array.setflags(write=False)
    return ControlSolution(
        x_star=x_star,
        w_new=w_new,
        lambda_star=lambda_star,
        objective=objective,
        partitions=partitions,
        residual=residual,
        solver=solver,
    )


def solve_control(
    inst: ControlInstance,
    solver: SolverKind = SolverKind.BREAKPOINTS,
    parallel: bool = False,
    workers: Optional[int] = None,
) -> ControlSolution:
    """Checks feasibility, solves every node's sub-problem and assembles ``X*``.

    Parameters
    ----------
    solver : SolverKind
        Breakpoint scan (default) or partition enumeration.
    parallel : bool
        Solve the independent sub-problems in a process pool.
    workers : Optional[int]
        Pool size; defaults to ``config.WORKERS``.

    Raises
    ------
    InfeasibleTarget
        The target cannot be reached within the bounds; the exception carries the report.
    """

    report = feasibility_check(inst)
    if not report:
        raise InfeasibleTarget(report)

    problems: List[LocalProblem] = [LocalProblem.from_instance(inst, i) for i in range(inst.n)]
    if parallel:
        with ProcessPoolExecutor(max_workers=workers or config.WORKERS) as pool:
            results = list(pool.map(solve_local, problems, repeat(solver)))
    else:
        results = [solve_local(lp, solver) for lp in problems]

    log.info(f"Solved {inst.n} local problems with the {solver.value} solver")
    return assemble_solution(inst, results)


def centrality_spread(inst: ControlInstance, weights: np.ndarray) -> float:
    """``max - min`` of the centrality that ``weights`` give with the instance's alpha and z."""

    g = inst.g.with_weights(weights)
    rho = oracle_alpha_centrality(g, CentralityConfig(alpha=inst.alpha, z=inst.z))
    return float(rho.max() - rho.min())


def attack_protection(
    inst: ControlInstance,
    target_mode: TargetMode = TargetMode.ONES,
    level: Optional[float] = None,
    solver: SolverKind = SolverKind.BREAKPOINTS,
    parallel: bool = False,
) -> ControlSolution:
    """Equalizes the centrality of every node so that no node is a more valuable target than another.

    ``TargetMode.ONES`` aims at the all-ones vector, ``TargetMode.UNIFORM`` at ``level`` on every node.
    """

    if target_mode is TargetMode.ONES:
        level = 1.0
    elif level is None or not level > 0:
        raise InvalidConfiguration("A uniform target needs a positive level.")

    target = inst.with_target(np.full(inst.n, float(level)))
    solution = solve_control(target, solver=solver, parallel=parallel)

    before = centrality_spread(inst, inst.g.weights)
    after = centrality_spread(inst, solution.w_new)
    log.info(f"Centrality spread {before:.6g} -> {after:.3e}")
    return replace(solution, spread_before=before, spread_after=after)
