from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..graph import InfluenceGraph, PerronMatrix
from ..trace import Access


__all__ = [
    "Agent",
    "Mailbox",
    "make_agents",
]


@dataclass
class Agent:
    """One node of the network with the data it is allowed to know.

    Attributes
    ----------
    id : int
        0-based agent id.
    neighbors : Tuple[int, ...]
        Communication neighbors in ascending order, self excluded.
    w_in : Dict[int, float]
        ``{j: w_ji}`` for every neighbor ``j`` and for ``i`` itself when it has a self-loop.
    w_out : Dict[int, float]
        ``{j: w_ij}`` over the same keys.
    q_row : Dict[int, float]
        ``{j: q_ij}`` over ``i`` and its neighbors, empty when no Perron matrix was given.
    state : Dict[str, Any]
        Protocol-specific local variables.
    buffer : Dict[int, Dict[str, float]]
        Data collected from neighbors by exchange protocols, keyed by source.
    """

    id: int
    neighbors: Tuple[int, ...]
    w_in: Dict[int, float]
    w_out: Dict[int, float]
    self_loop: bool = False
    q_row: Dict[int, float] = field(default_factory=dict)
    state: Dict[str, Any] = field(default_factory=dict)
    buffer: Dict[int, Dict[str, float]] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"<Agent id={self.id + 1} neighbors={[j + 1 for j in self.neighbors]}>"


def make_agents(g: InfluenceGraph, perron: Optional[PerronMatrix] = None) -> List[Agent]:
    agents = []
    for i in range(g.n):
        known = g.extended_neighbors(i)
        q_row = {}
        if perron is not None:
            q_row = {j: float(perron.q[i, j]) for j in sorted((i, *g.neighbors[i]))}
        agents.append(
            Agent(
                id=i,
                neighbors=g.neighbors[i],
                w_in={j: float(g.weights[j, i]) for j in known},
                w_out={j: float(g.weights[i, j]) for j in known},
                self_loop=i in g.self_loops,
                q_row=q_row,
            )
        )
    return agents


class Mailbox:
    """Read access to the messages emitted in the previous round.

    Every read is logged when the network runs audited, so foreign reads show up in the locality audit.
    """

    def __init__(
        self,
        agent: Agent,
        board: Dict[int, Dict[str, float]],
        round_index: int,
        accesses: Optional[List[Access]] = None,
        directed: Optional[Dict[int, Dict[int, Dict[str, float]]]] = None,
    ):
        self.agent = agent
        self.board = board
        self.round_index = round_index
        self.accesses = accesses
        self.directed = directed

    def get(self, source: int, channel: str) -> float:
        if self.accesses is not None:
            self.accesses.append(Access(self.round_index, self.agent.id, source))
        if self.directed is not None:
            return self.directed[source][self.agent.id][channel]
        return self.board[source][channel]

    def payload(self, source: int) -> Dict[str, float]:
        if self.accesses is not None:
            self.accesses.append(Access(self.round_index, self.agent.id, source))
        if self.directed is not None:
            return dict(self.directed[source][self.agent.id])
        return dict(self.board[source])
