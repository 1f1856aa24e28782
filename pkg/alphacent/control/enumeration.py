from __future__ import annotations

import itertools
import logging
import math
from typing import Optional, Tuple

from .. import config
from ..constants import Saturation, SolverKind
from ..errors import NeighborhoodTooLarge, NoValidPartition
from .local import (
    closed_form_lambda,
    fixed_total,
    lower_breakpoints,
    node_solution,
    pick_in_interval,
    residual_scale,
    tolerance,
    upper_breakpoints,
)
from .models import ControlInstance, LocalProblem, NodeSolution


__all__ = [
    "count_partitions",
    "verify_partition",
    "enumerate_local",
    "solve_node_enumeration",
]

log = logging.getLogger(__name__)

LABEL_ORDER = (Saturation.INTERIOR, Saturation.LOWER, Saturation.UPPER)


def count_partitions(degree: int) -> int:
    """Ordered splits of ``degree`` entries into interior, lower and upper sets."""

    return 3**degree


def verify_partition(lp: LocalProblem, labels: Tuple[Saturation, ...]) -> Optional[float]:
    """Multiplier realizing ``labels``, or ``None`` when the labels contradict the optimality conditions.

    With interior entries the multiplier follows from the balance equation and every entry must sit on the
    side of its breakpoints its label claims. Without interior entries the saturated entries alone must
    balance the column, and the multiplier is picked inside the interval all labels allow.
    """

    lows = upper_breakpoints(lp)
    highs = lower_breakpoints(lp)

    if Saturation.INTERIOR in labels:
        lam = closed_form_lambda(lp, labels)
        for label, low, high in zip(labels, lows, highs):
            if label is Saturation.INTERIOR:
                ok = low - tolerance(low, lam) <= lam <= high + tolerance(high, lam)
            elif label is Saturation.LOWER:
                ok = lam >= high - tolerance(high, lam)
            else:
                ok = lam <= low + tolerance(low, lam)
            if not ok:
                return None
        return lam

    balance = fixed_total(lp, labels) - lp.demand
    if abs(balance) > tolerance(residual_scale(lp)):
        return None

    left = max((h for label, h in zip(labels, highs) if label is Saturation.LOWER), default=-math.inf)
    right = min((lo for label, lo in zip(labels, lows) if label is Saturation.UPPER), default=math.inf)
    if left > right + tolerance(left, right):
        return None
    return pick_in_interval(left, right)


def enumerate_local(lp: LocalProblem, exhaustive: bool = False) -> NodeSolution:
    """Visits the labelings of ``lp`` in ternary-counter order; the first valid one wins.

    With ``exhaustive=True`` all ``3 ** degree`` labelings are visited even after a valid one is found.
    """

    if lp.degree > config.ENUMERATION_LIMIT:
        raise NeighborhoodTooLarge(
            f"Node {lp.node + 1} has {lp.degree} incident weights; enumeration is limited to "
            f"{config.ENUMERATION_LIMIT}."
        )

    found = None
    visited = 0
    for labels in itertools.product(LABEL_ORDER, repeat=lp.degree):
        visited += 1
        if found is not None:
            continue
        lam = verify_partition(lp, labels)
        if lam is not None:
            found = (lam, labels)
            if not exhaustive:
                break

    if found is None:
        raise NoValidPartition(f"No labeling of node {lp.node + 1} satisfies the optimality conditions.")

    lam, labels = found
    log.debug(f"node {lp.node + 1}: lambda={lam:.15g} after {visited} of {count_partitions(lp.degree)} labelings")
    return node_solution(lp, lam, SolverKind.ENUMERATION, labels=labels, visited=visited)


def solve_node_enumeration(inst: ControlInstance, i: int, exhaustive: bool = False) -> NodeSolution:
    return enumerate_local(LocalProblem.from_instance(inst, i), exhaustive=exhaustive)
