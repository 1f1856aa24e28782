"""Saturation rule and residual of the per-node problems.

For node ``i`` with multiplier ``lam`` the adjusted weight of row ``j`` is
``clip(w_ji - lam * rho_j, w_lower_ji, w_upper_ji)``, and

    f_i(lam) = sum_j clip(...) * rho_j - (rho_i - z_i) / alpha

is piecewise linear and nonincreasing. Its root gives the optimal column.
"""

from __future__ import annotations

from typing import Iterable, Optional, Tuple

import numpy as np

from ..constants import Saturation, SolverKind
from ..helpers.utils import exact_dot, exact_sum
from .models import ControlInstance, LocalProblem, NodeSolution


__all__ = [
    "RELATIVE_TOL",
    "tolerance",
    "proposal",
    "local_residual",
    "residual_f",
    "lower_breakpoints",
    "upper_breakpoints",
    "classify",
    "closed_form_lambda",
    "fixed_total",
    "residual_scale",
    "pick_in_interval",
    "node_solution",
]

RELATIVE_TOL = 1e-12


def tolerance(*scales: float) -> float:
    return RELATIVE_TOL * max([1.0, *(abs(s) for s in scales)])


def residual_scale(lp: LocalProblem) -> float:
    return max(abs(lp.demand), exact_dot(lp.w_upper, lp.rho))


def proposal(lp: LocalProblem, lam: float) -> np.ndarray:
    return np.clip(lp.w - lam * lp.rho, lp.w_lower, lp.w_upper)


def local_residual(lp: LocalProblem, lam: float) -> float:
    return exact_dot(proposal(lp, lam), lp.rho) - lp.demand


def residual_f(inst: ControlInstance, i: int, lam: float) -> float:
    """``f_i(lam)``; depends on node ``i`` and its neighborhood only."""

    return local_residual(LocalProblem.from_instance(inst, i), lam)


def upper_breakpoints(lp: LocalProblem) -> np.ndarray:
    """Multipliers at or below which each entry sits at its upper bound."""

    return (lp.w - lp.w_upper) / lp.rho


def lower_breakpoints(lp: LocalProblem) -> np.ndarray:
    """Multipliers at or above which each entry sits at its lower bound."""

    return (lp.w - lp.w_lower) / lp.rho


def classify(lp: LocalProblem, lam: float) -> Tuple[Saturation, ...]:
    labels = []
    for low, high in zip(upper_breakpoints(lp), lower_breakpoints(lp)):
        if lam >= high - tolerance(high, lam):
            labels.append(Saturation.LOWER)
        elif lam <= low + tolerance(low, lam):
            labels.append(Saturation.UPPER)
        else:
            labels.append(Saturation.INTERIOR)
    return tuple(labels)


def fixed_total(lp: LocalProblem, labels: Iterable[Saturation]) -> float:
    """Contribution of the saturated entries, ``sum_L w_lower rho + sum_U w_upper rho``."""

    terms = []
    for k, label in enumerate(labels):
        if label is Saturation.LOWER:
            terms.append(lp.w_lower[k] * lp.rho[k])
        elif label is Saturation.UPPER:
            terms.append(lp.w_upper[k] * lp.rho[k])
    return exact_sum(terms)


def closed_form_lambda(lp: LocalProblem, labels: Tuple[Saturation, ...]) -> float:
    """Multiplier that balances the column when the interior set of ``labels`` is not empty."""

    interior = [k for k, label in enumerate(labels) if label is Saturation.INTERIOR]
    numerator = exact_sum(
        [
            *(lp.w[k] * lp.rho[k] for k in interior),
            fixed_total(lp, labels),
            -lp.demand,
        ]
    )
    return numerator / exact_sum(lp.rho[k] ** 2 for k in interior)


def pick_in_interval(left: float, right: float) -> float:
    """Midpoint of ``[left, right]``, or its finite end when the interval is a half-line."""

    if np.isfinite(left) and np.isfinite(right):
        return 0.5 * (left + right)
    if np.isfinite(left):
        return float(left)
    if np.isfinite(right):
        return float(right)
    return 0.0


def node_solution(
    lp: LocalProblem,
    lam: float,
    solver: Optional[SolverKind],
    labels: Tuple[Saturation, ...] = None,
    visited: int = 0,
) -> NodeSolution:
    adjusted = proposal(lp, lam)
    adjusted.setflags(write=False)
    column = adjusted - lp.w
    column.setflags(write=False)
    return NodeSolution(
        node=lp.node,
        lambda_=float(lam),
        neighborhood=lp.neighborhood,
        labels=labels or classify(lp, lam),
        proposal=adjusted,
        column=column,
        solver=solver,
        visited=visited,
    )
