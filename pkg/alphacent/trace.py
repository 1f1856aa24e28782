from __future__ import annotations

import time
from dataclasses import dataclass, field
from os import PathLike
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd

from . import config
from .errors import DimensionMismatch


__all__ = [
    "Access",
    "RoundTrace",
    "StopCriterion",
]


class Access(NamedTuple):
    """One read of another agent's round-t message."""

    round: int
    agent: int
    source: int


@dataclass
class RoundTrace:
    """Per-round snapshots of declared observables.

    Round indices are contiguous from 0; round 0 holds the initial conditions.

    Attributes
    ----------
    protocol : str
        Name of the protocol or iteration that produced the trace.
    observables : Sequence[str]
        Names of the per-agent vectors recorded at every round.
    params : Dict[str, Any]
        Parameters of the run.
    rounds : List[Dict[str, np.ndarray]]
        One snapshot per round.
    accesses : List[Access]
        Message reads, only filled when the run is audited.
    audited : bool
        Whether message reads were recorded.
    """

    protocol: str
    observables: Sequence[str]
    params: Dict[str, Any] = field(default_factory=dict)
    rounds: List[Dict[str, np.ndarray]] = field(default_factory=list)
    accesses: List[Access] = field(default_factory=list)
    audited: bool = False
    started_at: float = field(default_factory=time.perf_counter)
    wall_clock: float = 0.0

    def record(self, **values: np.ndarray):
        missing = set(self.observables) - values.keys()
        if missing:
            raise DimensionMismatch(f"Snapshot is missing observables: {', '.join(sorted(missing))}")
        self.rounds.append({name: np.array(values[name], dtype=float) for name in self.observables})
        self.wall_clock = time.perf_counter() - self.started_at

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def last_round(self) -> int:
        return len(self.rounds) - 1

    def series(self, name: str) -> np.ndarray:
        """``(rounds, n)`` array of one observable."""

        return np.vstack([snapshot[name] for snapshot in self.rounds])

    def final(self, name: str) -> np.ndarray:
        return self.rounds[-1][name]

    def to_frame(self, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Long format: one row per (round, agent), 1-based agent ids."""

        columns = list(columns or self.observables)
        frames = []
        for t, snapshot in enumerate(self.rounds):
            n = len(snapshot[self.observables[0]])
            frame = pd.DataFrame({"t": np.full(n, t), "agent": np.arange(1, n + 1)})
            for name in columns:
                frame[name] = snapshot[name]
            frames.append(frame)
        if not frames:
            return pd.DataFrame(columns=["t", "agent", *columns])
        return pd.concat(frames, ignore_index=True)

    def to_csv(self, path: Union[str, PathLike], columns: Optional[Sequence[str]] = None, digits: int = None):
        frame = self.to_frame(columns)
        frame.to_csv(path, index=False, float_format=f"%.{digits or config.CSV_DIGITS}g")

    def __repr__(self) -> str:
        return f"<RoundTrace protocol={self.protocol} rounds={len(self.rounds)} observables={list(self.observables)}>"


@dataclass(frozen=True)
class StopCriterion:
    """Round cap and residual tolerance; ``max_rounds=None`` lets the iteration pick its default."""

    max_rounds: int = None
    tol: float = None
