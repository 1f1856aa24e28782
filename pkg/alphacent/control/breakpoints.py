from __future__ import annotations

import bisect
import logging

import numpy as np

from ..constants import Saturation, SolverKind
from ..errors import NoValidPartition
from ..helpers.utils import exact_dot
from .local import (
    closed_form_lambda,
    local_residual,
    lower_breakpoints,
    node_solution,
    pick_in_interval,
    residual_scale,
    tolerance,
    upper_breakpoints,
)
from .models import ControlInstance, LocalProblem, NodeSolution


__all__ = [
    "segment_labels",
    "breakpoint_local",
    "solve_node_breakpoints",
]

log = logging.getLogger(__name__)


class _Residual:
    """Sequence view of ``f`` at the sorted breakpoints so :mod:`bisect` can search it lazily."""

    def __init__(self, lp: LocalProblem, points: np.ndarray, tol: float, sign: int):
        self.lp = lp
        self.points = points
        self.tol = tol
        self.sign = sign
        self.calls = 0

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k: int) -> bool:
        self.calls += 1
        value = local_residual(self.lp, self.points[k])
        # f is nonincreasing, so both predicates are monotone along the points
        if self.sign > 0:
            return not value > self.tol
        return value < -self.tol


def segment_labels(lp: LocalProblem, left: float, right: float):
    """Labels of every entry on the open segment ``(left, right)`` between consecutive breakpoints."""

    mid = 0.5 * (left + right)
    labels = []
    for low, high in zip(upper_breakpoints(lp), lower_breakpoints(lp)):
        if mid >= high:
            labels.append(Saturation.LOWER)
        elif mid <= low:
            labels.append(Saturation.UPPER)
        else:
            labels.append(Saturation.INTERIOR)
    return tuple(labels)


def breakpoint_local(lp: LocalProblem) -> NodeSolution:
    """Root of ``f`` by bisection over the sorted saturation breakpoints.

    ``f`` is linear between consecutive breakpoints. The segment where it changes sign fixes the labels, and
    the multiplier comes from the same balance equation the enumeration solver uses. When ``f`` vanishes on a
    whole interval the midpoint (or the finite end of a half-line) is returned.
    """

    tol = tolerance(residual_scale(lp))
    at_minus_inf = exact_dot(lp.w_upper, lp.rho) - lp.demand
    at_plus_inf = exact_dot(lp.w_lower, lp.rho) - lp.demand

    if at_minus_inf < -tol or at_plus_inf > tol:
        raise NoValidPartition(
            f"Node {lp.node + 1} cannot balance its column: f ranges over [{at_plus_inf:.6g}, {at_minus_inf:.6g}]."
        )

    points = np.unique(np.concatenate([upper_breakpoints(lp), lower_breakpoints(lp)]))
    if points.size == 0:
        return node_solution(lp, 0.0, SolverKind.BREAKPOINTS)

    # first point where f is no longer positive, first point where f is negative
    nonpositive = _Residual(lp, points, tol, sign=1)
    negative = _Residual(lp, points, tol, sign=-1)
    k = bisect.bisect_left(nonpositive, True)
    m = bisect.bisect_left(negative, True)
    visited = nonpositive.calls + negative.calls

    if k < m:
        # f vanishes on points[k:m]; the zero set extends to infinity where f does
        left = -np.inf if k == 0 and abs(at_minus_inf) <= tol else points[k]
        right = np.inf if m == len(points) and abs(at_plus_inf) <= tol else points[m - 1]
        if np.isinf(left) and np.isinf(right):
            lam = pick_in_interval(points[0], points[-1])
        else:
            lam = pick_in_interval(left, right)
        if right > left:
            log.warning(f"node {lp.node + 1}: residual vanishes on [{left:.6g}, {right:.6g}], picked {lam:.15g}")
        return node_solution(lp, lam, SolverKind.BREAKPOINTS, visited=visited)

    # f(points[k-1]) > 0 > f(points[k]); k >= 1 since f(points[0]) = f(-inf) >= -tol
    labels = segment_labels(lp, points[k - 1], points[k])
    lam = closed_form_lambda(lp, labels)
    lam = float(np.clip(lam, points[k - 1], points[k]))
    log.debug(f"node {lp.node + 1}: lambda={lam:.15g} on segment {k} of {len(points) - 1}")
    return node_solution(lp, lam, SolverKind.BREAKPOINTS, visited=visited)


def solve_node_breakpoints(inst: ControlInstance, i: int) -> NodeSolution:
    return breakpoint_local(LocalProblem.from_instance(inst, i))
