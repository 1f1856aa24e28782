from __future__ import annotations

import logging

import numpy as np
import scipy.optimize

from ..constants import Saturation
from ..errors import NonConvergence
from ..helpers.utils import exact_dot
from .models import ControlInstance, ControlSolution, LocalProblem, NodeSolution
from .solver import assemble_solution


__all__ = [
    "KKT_TOL",
    "qp_local",
    "qp_oracle",
]

log = logging.getLogger(__name__)

KKT_TOL = 1e-9

# distance to a bound under which an entry counts as saturated
BOUND_TOL = 1e-9


def _labels(lp: LocalProblem, p: np.ndarray):
    labels = []
    for value, low, high in zip(p, lp.w_lower, lp.w_upper):
        if value <= low + BOUND_TOL:
            labels.append(Saturation.LOWER)
        elif value >= high - BOUND_TOL:
            labels.append(Saturation.UPPER)
        else:
            labels.append(Saturation.INTERIOR)
    return tuple(labels)


def _multiplier(lp: LocalProblem, p: np.ndarray, labels) -> float:
    interior = [k for k, label in enumerate(labels) if label is Saturation.INTERIOR]
    if not interior:
        return 0.0
    return float(np.mean([(lp.w[k] - p[k]) / lp.rho[k] for k in interior]))


def qp_local(lp: LocalProblem) -> NodeSolution:
    """Solves ``min 1/2 ||p - w||^2`` subject to ``p . rho = demand`` and the box, in the primal.

    The minimizer is SLSQP on the quadratic with its exact gradient. None of the saturation rule the
    per-node solvers share is used here, so agreement with them is an independent check.
    """

    if lp.degree == 0:
        p = np.zeros(0)
    else:
        w = np.asarray(lp.w)
        res = scipy.optimize.minimize(
            lambda p: 0.5 * np.dot(p - w, p - w),
            x0=np.clip(w, lp.w_lower, lp.w_upper),
            jac=lambda p: p - w,
            method="SLSQP",
            bounds=list(zip(lp.w_lower, lp.w_upper)),
            constraints=[
                {
                    "type": "eq",
                    "fun": lambda p: np.dot(p, lp.rho) - lp.demand,
                    "jac": lambda p: np.asarray(lp.rho),
                }
            ],
            options={"ftol": 1e-15, "maxiter": 1000},
        )
        if not res.success:
            raise NonConvergence(f"Node {lp.node + 1}: {res.message}")
        p = np.clip(res.x, lp.w_lower, lp.w_upper)

    scale = max(1.0, abs(lp.demand))
    kkt = abs(exact_dot(p, lp.rho) - lp.demand) if lp.degree else 0.0
    if kkt > KKT_TOL * scale:
        raise NonConvergence(f"Node {lp.node + 1}: constraint residual {kkt:.3e} above {KKT_TOL:.0e}.")

    labels = _labels(lp, p)
    p.setflags(write=False)
    column = p - lp.w
    column.setflags(write=False)
    log.debug(f"node {lp.node + 1}: primal solve done, constraint residual {kkt:.3e}")
    return NodeSolution(
        node=lp.node,
        lambda_=_multiplier(lp, p, labels),
        neighborhood=lp.neighborhood,
        labels=labels,
        proposal=p,
        column=column,
        solver=None,
    )


def qp_oracle(inst: ControlInstance) -> ControlSolution:
    """Reference solution of the weight-adjustment problem, one primal QP per column."""

    results = [qp_local(LocalProblem.from_instance(inst, i)) for i in range(inst.n)]
    return assemble_solution(inst, results)
