from __future__ import annotations

import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..constants import Protocol as ProtocolName
from ..control.models import ControlInstance, LocalProblem
from ..errors import DimensionMismatch, InvalidConfiguration, ProtocolError
from ..graph import CentralityConfig, InfluenceGraph, alpha_bound_from_norms
from ..trace import StopCriterion
from .agent import Agent, Mailbox


__all__ = [
    "Protocol",
    "EstimateProtocol",
    "ConsensusProtocol",
    "MaxConsensusProtocol",
    "ControlExchangeProtocol",
]

State = Dict[str, Any]


class Protocol:
    """Per-agent behaviour run by :class:`~alphacent.simnet.engine.SimNetwork`.

    A round reads the messages every agent emitted from its round-``t`` state and returns each agent's
    round-``t+1`` state. ``update`` must not mutate ``agent.state``; the engine commits all new states at once.
    """

    name: ProtocolName
    observables: Tuple[str, ...] = ()
    directed = False

    def init_state(self, agent: Agent) -> State:
        raise NotImplementedError

    def emit(self, agent: Agent) -> Dict[str, float]:
        raise NotImplementedError

    def emit_to(self, agent: Agent, recipient: int) -> Dict[str, float]:
        return self.emit(agent)

    def update(self, agent: Agent, mailbox: Mailbox, t: int) -> State:
        raise NotImplementedError

    def observe(self, agents: Sequence[Agent]) -> Dict[str, np.ndarray]:
        return {name: np.array([a.state[name] for a in agents], dtype=float) for name in self.observables}

    def converged(self, before: List[State], after: List[State], tol: float) -> bool:
        raise NotImplementedError

    def default_stop(self, g: InfluenceGraph) -> StopCriterion:
        return StopCriterion(max_rounds=config.MAX_ROUNDS, tol=config.TOL)

    @property
    def params(self) -> Dict[str, Any]:
        return {}


def _vector(values: Iterable[float], n: int, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (n,):
        raise DimensionMismatch(f"{name} has length {vector.size}, expected {n}.")
    return vector


def _influence_sum(agent: Agent, mailbox: Mailbox, own: float) -> float:
    """``sum_j w_ji c_j`` over the neighbors' messages plus the self-loop term."""

    terms = [agent.w_in[j] * mailbox.get(j, "c") for j in agent.neighbors]
    if agent.self_loop:
        terms.append(agent.w_in[agent.id] * own)
    return math.fsum(terms)


def _mix(agent: Agent, mailbox: Mailbox, channel: str, own: float) -> float:
    """``sum_j q_ij v_j`` over the agent and its neighbors."""

    terms = [q * (own if j == agent.id else mailbox.get(j, channel)) for j, q in agent.q_row.items()]
    return math.fsum(terms)


def _max_change(before: List[State], after: List[State], key: str) -> float:
    old = np.array([s[key] for s in before], dtype=float)
    new = np.array([s[key] for s in after], dtype=float)
    return np.max(np.abs(new - old))


class EstimateProtocol(Protocol):
    """Every agent repeats ``c_i <- alpha * sum_j w_ji c_j + z_i``."""

    name = ProtocolName.ESTIMATE
    observables = ("c",)

    def __init__(self, cfg: CentralityConfig, c0: Optional[Iterable[float]] = None):
        self.cfg = cfg
        self.c0 = cfg.z.copy() if c0 is None else _vector(c0, cfg.n, "c0")

    def init_state(self, agent: Agent) -> State:
        return {"c": float(self.c0[agent.id]), "z": float(self.cfg.z[agent.id]), "alpha": self.cfg.alpha}

    def emit(self, agent: Agent) -> Dict[str, float]:
        return {"c": agent.state["c"]}

    def update(self, agent: Agent, mailbox: Mailbox, t: int) -> State:
        s = agent.state
        c = s["alpha"] * _influence_sum(agent, mailbox, s["c"]) + s["z"]
        return {**s, "c": c}

    def converged(self, before: List[State], after: List[State], tol: float) -> bool:
        return float(_max_change(before, after, "c")) < tol

    @property
    def params(self) -> Dict[str, Any]:
        return {"alpha": self.cfg.alpha}


class ConsensusProtocol(Protocol):
    """The consensus cascade, one agent at a time.

    Messages carry ``c``, ``cbar`` and ``x``; the increments are the agent's own and never leave it.
    """

    name = ProtocolName.CONSENSUS
    observables = ("c", "dc", "cbar", "y", "dy", "x")

    def __init__(self, cfg: CentralityConfig, x0: Iterable[float], correction: bool = True):
        self.cfg = cfg
        self.x0 = _vector(x0, cfg.n, "x0")
        self.correction = correction

    def init_state(self, agent: Agent) -> State:
        if not agent.q_row:
            raise ProtocolError("Consensus needs a network built with a Perron matrix.", round_index=0)
        z = float(self.cfg.z[agent.id])
        x0 = float(self.x0[agent.id])
        return {
            "c": z,
            "dc": 0.0,
            "cbar": z,
            "y": 0.0,
            "dy": 0.0,
            "x": x0,
            "x0": x0,
            "z": z,
            "alpha": self.cfg.alpha,
        }

    def emit(self, agent: Agent) -> Dict[str, float]:
        s = agent.state
        return {"c": s["c"], "cbar": s["cbar"], "x": s["x"]}

    def update(self, agent: Agent, mailbox: Mailbox, t: int) -> State:
        s = agent.state
        c = s["alpha"] * _influence_sum(agent, mailbox, s["c"]) + s["z"]
        dc = c - s["c"]
        cbar = _mix(agent, mailbox, "cbar", s["cbar"]) + dc
        if not self.correction:
            y = 0.0
        elif cbar == 0:
            y = s["y"]
        else:
            y = (c / cbar - 1.0) * s["x0"]
        dy = y - s["y"]
        x = _mix(agent, mailbox, "x", s["x"]) + dy
        return {**s, "c": c, "dc": dc, "cbar": cbar, "y": y, "dy": dy, "x": x}

    def converged(self, before: List[State], after: List[State], tol: float) -> bool:
        dc = np.array([s["dc"] for s in after], dtype=float)
        return float(_max_change(before, after, "x") + np.max(np.abs(dc))) < tol

    def default_stop(self, g: InfluenceGraph) -> StopCriterion:
        return StopCriterion(max_rounds=config.CONSENSUS_MAX_ROUNDS, tol=config.CONSENSUS_TOL)

    @property
    def params(self) -> Dict[str, Any]:
        return {"alpha": self.cfg.alpha, "correction": self.correction}


class MaxConsensusProtocol(Protocol):
    """Flooding of the largest column and row sums; every agent then derives the same alpha.

    Each agent starts from the sums of its own incident weights. The values stop changing after
    ``diameter`` rounds at the latest.
    """

    name = ProtocolName.MAX_CONSENSUS
    observables = ("col_max", "row_max", "alpha")

    def __init__(self, margin: float = 1.0):
        if not 0 < margin <= 1:
            raise InvalidConfiguration(f"Alpha margin must lie in (0, 1], got {margin}.")
        self.margin = margin

    def _alpha(self, col_max: float, row_max: float) -> float:
        if col_max <= 0 or row_max <= 0:
            return math.nan
        return self.margin * alpha_bound_from_norms(col_max, row_max)

    def init_state(self, agent: Agent) -> State:
        col = math.fsum(agent.w_in.values())
        row = math.fsum(agent.w_out.values())
        return {"col_max": col, "row_max": row, "alpha": self._alpha(col, row)}

    def emit(self, agent: Agent) -> Dict[str, float]:
        return {"col_max": agent.state["col_max"], "row_max": agent.state["row_max"]}

    def update(self, agent: Agent, mailbox: Mailbox, t: int) -> State:
        s = agent.state
        col = max([s["col_max"], *(mailbox.get(j, "col_max") for j in agent.neighbors)])
        row = max([s["row_max"], *(mailbox.get(j, "row_max") for j in agent.neighbors)])
        return {"col_max": col, "row_max": row, "alpha": self._alpha(col, row)}

    def converged(self, before: List[State], after: List[State], tol: float) -> bool:
        return all(b["col_max"] == a["col_max"] and b["row_max"] == a["row_max"] for b, a in zip(before, after))

    def default_stop(self, g: InfluenceGraph) -> StopCriterion:
        return StopCriterion(max_rounds=g.n + 1, tol=0.0)

    @property
    def params(self) -> Dict[str, Any]:
        return {"margin": self.margin}


class ControlExchangeProtocol(Protocol):
    """The single round in which every node collects what it needs to solve its own column.

    Node ``j`` sends node ``i`` the weight ``w_ji``, its bounds and its own target ``rho_star_j``.
    The collected data lands in ``agent.buffer``.
    """

    name = ProtocolName.CONTROL_EXCHANGE
    observables = ("received",)
    directed = True

    def __init__(self, inst: ControlInstance):
        self.inst = inst

    def init_state(self, agent: Agent) -> State:
        inst, i = self.inst, agent.id
        known = sorted(agent.w_out)
        agent.buffer = {}
        return {
            "rho_star": float(inst.rho_star[i]),
            "z": float(inst.z[i]),
            "alpha": inst.alpha,
            "w_upper_out": {j: float(inst.w_upper[i, j]) for j in known},
            "w_lower_out": {j: float(inst.w_lower[i, j]) for j in known},
            "received": 0.0,
        }

    def _row_entry(self, agent: Agent, recipient: int) -> Dict[str, float]:
        s = agent.state
        return {
            "w": agent.w_out[recipient],
            "w_upper": s["w_upper_out"][recipient],
            "w_lower": s["w_lower_out"][recipient],
            "rho_star": s["rho_star"],
        }

    def emit_to(self, agent: Agent, recipient: int) -> Dict[str, float]:
        return self._row_entry(agent, recipient)

    def update(self, agent: Agent, mailbox: Mailbox, t: int) -> State:
        # nothing reads the buffer during the round, so it is filled in place
        for j in agent.neighbors:
            agent.buffer[j] = mailbox.payload(j)
        if agent.self_loop:
            agent.buffer[agent.id] = self._row_entry(agent, agent.id)
        return {**agent.state, "received": float(len(agent.neighbors))}

    def converged(self, before: List[State], after: List[State], tol: float) -> bool:
        return True

    def default_stop(self, g: InfluenceGraph) -> StopCriterion:
        return StopCriterion(max_rounds=1, tol=0.0)

    @staticmethod
    def local_problems(agents: Sequence[Agent]) -> List[LocalProblem]:
        return [LocalProblem.from_buffer(agent) for agent in agents]
