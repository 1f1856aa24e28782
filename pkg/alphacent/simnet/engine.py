from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

from .. import config
from ..errors import AlphaCentralityError, ProtocolError
from ..graph import InfluenceGraph, PerronMatrix
from ..helpers.formats import counted
from ..trace import Access, RoundTrace, StopCriterion
from .agent import Agent, Mailbox, make_agents
from .protocols import Protocol


__all__ = [
    "SimNetwork",
    "run_protocol",
]

log = logging.getLogger(__name__)


class SimNetwork:
    """Synchronous message-passing network over an :class:`InfluenceGraph`.

    Every round has two phases. All agents emit messages from their current state, then every agent computes
    its next state from its own state and the messages of its neighbors. New states are committed together
    once the whole round is computed.

    Parameters
    ----------
    g : InfluenceGraph
        Topology and weights; each agent only receives its own incident weights.
    perron : Optional[PerronMatrix]
        Mixing weights handed to the agents, needed by the consensus protocol.
    parallel : bool
        Compute the agents of a round in a thread pool.
    workers : Optional[int]
        Pool size, defaults to ``config.WORKERS``.
    """

    def __init__(
        self,
        g: InfluenceGraph,
        perron: Optional[PerronMatrix] = None,
        parallel: bool = False,
        workers: Optional[int] = None,
    ):
        self.g = g
        self.perron = perron
        self.parallel = parallel
        self.workers = workers or config.WORKERS
        self.agents: List[Agent] = make_agents(g, perron)

    def _messages(self, protocol: Protocol):
        if protocol.directed:
            directed = {
                agent.id: {i: protocol.emit_to(agent, i) for i in agent.neighbors} for agent in self.agents
            }
            return {}, directed
        return {agent.id: protocol.emit(agent) for agent in self.agents}, None

    def _round(self, protocol: Protocol, t: int, audit: bool):
        board, directed = self._messages(protocol)
        reads: Dict[int, List[Access]] = {agent.id: [] for agent in self.agents} if audit else {}

        def step(agent: Agent):
            mailbox = Mailbox(agent, board, t, accesses=reads.get(agent.id), directed=directed)
            return protocol.update(agent, mailbox, t)

        try:
            if self.parallel:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    states = list(pool.map(step, self.agents))
            else:
                states = [step(agent) for agent in self.agents]
        except ProtocolError:
            raise
        except (AlphaCentralityError, ArithmeticError, KeyError, ValueError) as e:
            raise ProtocolError(f"{protocol.name.value} failed: {e}", round_index=t + 1) from e

        accesses = [a for agent in self.agents for a in reads.get(agent.id, [])]
        return states, accesses

    def run(self, protocol: Protocol, stop: Optional[StopCriterion] = None, audit: bool = False) -> RoundTrace:
        """Runs ``protocol`` from fresh agent states until it reports convergence or the round cap.

        Returns
        -------
        RoundTrace
            Observables per round; ``params["converged"]`` tells how the run ended and ``accesses`` holds
            every message read when ``audit`` is set.
        """

        default = protocol.default_stop(self.g)
        stop = stop or default
        tol = default.tol if stop.tol is None else stop.tol
        max_rounds = stop.max_rounds or default.max_rounds

        for agent in self.agents:
            agent.buffer = {}
            agent.state = protocol.init_state(agent)

        trace = RoundTrace(
            protocol.name.value,
            protocol.observables,
            params={**protocol.params, "tol": tol, "max_rounds": max_rounds},
            audited=audit,
        )
        trace.record(**protocol.observe(self.agents))

        t, converged = 0, False
        while t < max_rounds:
            states, accesses = self._round(protocol, t, audit)
            before = [agent.state for agent in self.agents]
            for agent, state in zip(self.agents, states):
                agent.state = state
            t += 1

            trace.accesses.extend(accesses)
            trace.record(**protocol.observe(self.agents))
            if protocol.converged(before, states, tol):
                converged = True
                break

        trace.params["converged"] = converged
        if converged:
            log.info(f"{protocol.name.value} settled after {counted(t, 'round')}")
        else:
            log.warning(f"{protocol.name.value} stopped at the cap of {counted(t, 'round')}")
        return trace


def run_protocol(
    g: InfluenceGraph,
    protocol: Protocol,
    stop: Optional[StopCriterion] = None,
    perron: Optional[PerronMatrix] = None,
    audit: bool = False,
    parallel: bool = False,
) -> RoundTrace:
    return SimNetwork(g, perron=perron, parallel=parallel).run(protocol, stop=stop, audit=audit)
