from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from . import config
from .errors import DimensionMismatch, MaxRoundsExceeded, ZeroCentralityVector
from .graph import CentralityConfig, InfluenceGraph, PerronMatrix
from .helpers.formats import counted
from .helpers.utils import exact_matvec, exact_sum
from .trace import RoundTrace, StopCriterion


__all__ = [
    "ConsensusState",
    "initial_consensus_state",
    "consensus_step",
    "run_consensus",
    "weighted_average_oracle",
    "correction_input_oracle",
    "consensus_residuals",
    "conservation_defects",
    "CONSENSUS_OBSERVABLES",
]

log = logging.getLogger(__name__)

CONSENSUS_OBSERVABLES = ("c", "dc", "cbar", "y", "dy", "x")


@dataclass(frozen=True, eq=False)
class ConsensusState:
    """All per-agent variables of the consensus cascade at round ``t``.

    Attributes
    ----------
    c : np.ndarray
        Centrality estimates.
    dc : np.ndarray
        Last increment of ``c``.
    cbar : np.ndarray
        Running estimate of the mean centrality.
    y : np.ndarray
        Cumulative correction input.
    dy : np.ndarray
        Last increment of ``y``.
    x : np.ndarray
        Consensus values.
    x0 : np.ndarray
        Frozen initial consensus values.
    t : int
        Round counter.
    """

    c: np.ndarray
    dc: np.ndarray
    cbar: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    x: np.ndarray
    x0: np.ndarray
    t: int = 0

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in CONSENSUS_OBSERVABLES}


def initial_consensus_state(cfg: CentralityConfig, x0: Iterable[float]) -> ConsensusState:
    """``c(0) = cbar(0) = z``, ``y(0) = 0`` and ``x(0) = x0``."""

    x0 = np.array(x0, dtype=float)
    if x0.shape != (cfg.n,):
        raise DimensionMismatch(f"x0 has length {x0.size}, expected {cfg.n}.")
    zeros = np.zeros(cfg.n)
    return ConsensusState(
        c=cfg.z.copy(), dc=zeros, cbar=cfg.z.copy(), y=zeros, dy=zeros, x=x0.copy(), x0=x0, t=0
    )


def consensus_step(
    g: InfluenceGraph,
    cfg: CentralityConfig,
    q: PerronMatrix,
    s: ConsensusState,
    correction: bool = True,
) -> ConsensusState:
    """One round of the cascade.

    Mixing products use the round-``t`` values; the increments ``dc`` and ``dy`` are injected in the same round
    they are computed. ``y_i`` holds its previous value whenever ``cbar_i`` is exactly zero.
    With ``correction=False`` the correction input stays at zero and ``x`` runs plain average consensus.
    """

    if s.c.shape != (g.n,) or q.q.shape != (g.n, g.n):
        raise DimensionMismatch(f"State or Perron matrix does not match n={g.n}.")

    c = cfg.alpha * exact_matvec(g.weights.T, s.c) + cfg.z
    dc = c - s.c
    cbar = exact_matvec(q.q, s.cbar) + dc

    if correction:
        held = cbar == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(held, s.y, (c / cbar - 1.0) * s.x0)
        if np.any(held):
            log.debug(f"round {s.t + 1}: correction held at agents {(np.flatnonzero(held) + 1).tolist()}")
    else:
        y = np.zeros(g.n)

    dy = y - s.y
    x = exact_matvec(q.q, s.x) + dy

    return ConsensusState(c=c, dc=dc, cbar=cbar, y=y, dy=dy, x=x, x0=s.x0, t=s.t + 1)


def run_consensus(
    g: InfluenceGraph,
    cfg: CentralityConfig,
    q: PerronMatrix,
    x0: Iterable[float],
    stop: Optional[StopCriterion] = None,
    correction: bool = True,
) -> Tuple[ConsensusState, RoundTrace]:
    """Runs the cascade until ``||x(t+1) - x(t)||_inf + ||dc(t+1)||_inf < tol``.

    Raises
    ------
    MaxRoundsExceeded
        The round cap was hit first; the exception carries the residuals, the last state and the trace.
    """

    stop = stop or StopCriterion()
    tol = config.CONSENSUS_TOL if stop.tol is None else stop.tol
    max_rounds = stop.max_rounds or config.CONSENSUS_MAX_ROUNDS

    s = initial_consensus_state(cfg, x0)
    trace = RoundTrace(
        "consensus",
        CONSENSUS_OBSERVABLES,
        params={"alpha": cfg.alpha, "epsilon": q.epsilon, "tol": tol, "max_rounds": max_rounds},
    )
    trace.record(**s.snapshot())

    residual = math.inf
    while s.t < max_rounds:
        nxt = consensus_step(g, cfg, q, s, correction=correction)
        residual = float(np.max(np.abs(nxt.x - s.x)) + np.max(np.abs(nxt.dc)))
        s = nxt
        trace.record(**s.snapshot())
        log.debug(f"consensus round {s.t}: residual {residual:.3e}")
        if residual < tol:
            log.info(f"Consensus converged in {counted(s.t, 'round')}")
            return s, trace

    log.warning(f"Consensus hit the cap of {counted(max_rounds, 'round')} with residual {residual:.3e}")
    raise MaxRoundsExceeded(
        residuals={"x+dc": residual, "dc": float(np.max(np.abs(s.dc)))},
        state=s,
        trace=trace,
    )


def _check_centrality(rho: Iterable[float]) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or not np.any(rho > 0):
        raise ZeroCentralityVector
    return rho


def weighted_average_oracle(rho: Iterable[float], x0: Iterable[float]) -> float:
    """``rho^T x0 / rho^T 1``: the initial values weighted by influence."""

    rho = _check_centrality(rho)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != rho.shape:
        raise DimensionMismatch(f"x0 has length {x0.size}, expected {rho.size}.")
    return exact_sum((rho * x0).tolist()) / exact_sum(rho.tolist())


def correction_input_oracle(rho: Iterable[float], x0: Iterable[float]) -> np.ndarray:
    """``gamma_i = (rho_i / mean(rho) - 1) * x0_i``; ``mean(x0 + gamma)`` is the weighted average."""

    rho = _check_centrality(rho)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != rho.shape:
        raise DimensionMismatch(f"x0 has length {x0.size}, expected {rho.size}.")
    mean = exact_sum(rho.tolist()) / rho.size
    return (rho / mean - 1.0) * x0


def consensus_residuals(s: ConsensusState, rho: Iterable[float]) -> Dict[str, float]:
    """Distances of ``s`` from the six limits of the cascade.

    Keys are ``c``, ``dc``, ``cbar``, ``y``, ``dy`` and ``x``; every value is an infinity norm.
    """

    rho = _check_centrality(rho)
    mean = exact_sum(rho.tolist()) / rho.size
    gamma = correction_input_oracle(rho, s.x0)
    target = weighted_average_oracle(rho, s.x0)

    return {
        "c": float(np.max(np.abs(s.c - rho))),
        "dc": float(np.max(np.abs(s.dc))),
        "cbar": float(np.max(np.abs(s.cbar - mean))),
        "y": float(np.max(np.abs(s.y - gamma))),
        "dy": float(np.max(np.abs(s.dy))),
        "x": float(np.max(np.abs(s.x - target))),
    }


def conservation_defects(trace: RoundTrace) -> np.ndarray:
    """``1^T x(t+1) - 1^T x(t) - 1^T dy(t+1)`` for every recorded transition."""

    x = trace.series("x")
    dy = trace.series("dy")
    return np.array(
        [
            exact_sum([*x[t + 1].tolist(), *(-x[t]).tolist(), *(-dy[t + 1]).tolist()])
            for t in range(len(x) - 1)
        ]
    )
