from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from ..errors import ProtocolError
from ..graph import InfluenceGraph
from ..trace import Access, RoundTrace


__all__ = [
    "AuditReport",
    "locality_audit",
]


@dataclass(frozen=True)
class AuditReport:
    """Message reads that crossed a non-edge."""

    violations: List[Access] = field(default_factory=list)
    reads: int = 0

    @property
    def clean(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        return [f"violation {v.round} {v.agent + 1} {v.source + 1}" for v in self.violations]

    def render(self) -> str:
        return "".join(f"{line}\n" for line in self.lines())


def locality_audit(trace: RoundTrace, g: InfluenceGraph) -> AuditReport:
    """Flags every read of a message whose source is neither the reader nor one of its neighbors."""

    if not trace.audited:
        raise ProtocolError("The trace was recorded without read instrumentation.")

    allowed = [set(g.neighbors[i]) | {i} for i in range(g.n)]
    violations = [a for a in trace.accesses if a.source not in allowed[a.agent]]
    return AuditReport(violations=violations, reads=len(trace.accesses))
