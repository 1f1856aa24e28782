"""Readers for graph files and scenario files.

Graph files hold one record per line; ``#`` starts a comment and ids are 1-based::

    n 6
    e 1 2 3.5196 4.2857     # edge with w_12 and w_21 (each defaults to 1.0)
    s 1 5                   # self-loop with w_11
    bounds 1.5 5            # lower and upper bound on every weight
    u 1 2 4.0               # upper bound of w_12; `l` for a lower bound
    us 1 5.0                # upper bound of w_11; `ls` for a lower bound
    rho* 1 1 1 1 1 1
    z 0.24 0.21 0.18 0.15 0.12 0.09
    alpha 0.1

Scenario files hold ``key value...`` lines, for example ``graph benchmark.graph`` or ``x0 1 2 3``.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field, fields, replace
from os import PathLike
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from ..constants import AlphaMode, SolverKind, TargetMode
from ..control.models import ControlInstance, make_control_instance
from ..errors import AlphaCentralityError, ScenarioError
from ..graph import InfluenceGraph, build_graph


__all__ = [
    "GraphFile",
    "ScenarioSpec",
    "read_graph_file",
    "parse_graph_text",
    "read_scenario",
    "parse_scenario_text",
]

PathType = Union[str, PathLike]
Pair = Tuple[int, int]


@dataclass
class GraphFile:
    """Contents of a graph file, converted to 0-based ids."""

    n: int
    edges: List[Pair] = field(default_factory=list)
    self_loops: List[int] = field(default_factory=list)
    weights: Dict[Pair, float] = field(default_factory=dict)
    upper: Dict[Pair, float] = field(default_factory=dict)
    lower: Dict[Pair, float] = field(default_factory=dict)
    bounds: Optional[Tuple[float, float]] = None
    rho_star: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    alpha: Optional[float] = None
    path: Optional[str] = None

    @property
    def has_control_data(self) -> bool:
        return self.rho_star is not None or self.bounds is not None or bool(self.upper) or bool(self.lower)

    def to_graph(self) -> InfluenceGraph:
        try:
            return build_graph(self.n, self.edges, self.self_loops, self.weights)
        except AlphaCentralityError as e:
            raise ScenarioError(str(e), path=self.path) from e

    def bound_matrices(self, g: InfluenceGraph) -> Tuple[np.ndarray, np.ndarray]:
        """``(w_upper, w_lower)``; entries with no bound information are pinned to their weight."""

        if self.bounds is not None:
            lo, hi = self.bounds
            w_upper = g.support * hi
            w_lower = g.support * lo
        else:
            w_upper = np.array(g.weights, dtype=float)
            w_lower = np.array(g.weights, dtype=float)
        for (i, j), value in self.upper.items():
            w_upper[i, j] = value
        for (i, j), value in self.lower.items():
            w_lower[i, j] = value
        return w_upper, w_lower

    def to_control_instance(
        self,
        g: Optional[InfluenceGraph] = None,
        z: Optional[np.ndarray] = None,
        alpha: Optional[float] = None,
    ) -> ControlInstance:
        g = g or self.to_graph()
        z = self.z if z is None else z
        alpha = self.alpha if alpha is None else alpha
        missing = [name for name, value in (("rho*", self.rho_star), ("z", z), ("alpha", alpha)) if value is None]
        if missing:
            raise ScenarioError(f"Control data is missing: {', '.join(missing)}", path=self.path)

        w_upper, w_lower = self.bound_matrices(g)
        try:
            return make_control_instance(g, w_upper, w_lower, self.rho_star, z, alpha)
        except AlphaCentralityError as e:
            raise ScenarioError(str(e), path=self.path) from e


def _floats(tokens: List[str], count: Optional[int] = None) -> List[float]:
    if count is not None and len(tokens) != count:
        raise ValueError(f"expected {count} values, got {len(tokens)}")
    return [float(t) for t in tokens]


def _node(token: str, n: int) -> int:
    i = int(token)
    if not 1 <= i <= n:
        raise ValueError(f"node {i} out of range 1..{n}")
    return i - 1


def _records(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def parse_graph_text(text: str, path: Optional[str] = None) -> GraphFile:
    records = list(_records(text))
    if not records or records[0][1][0] != "n":
        raise ScenarioError("The first record must be `n <N>`.", path=path, line=records[0][0] if records else None)

    number, tokens = records[0]
    try:
        n = int(tokens[1])
        if n < 1:
            raise ValueError("n must be positive")
    except (IndexError, ValueError) as e:
        raise ScenarioError(f"Bad header: {e}", path=path, line=number)

    gf = GraphFile(n=n, path=path)

    def edge(args):
        i, j = _node(args[0], n), _node(args[1], n)
        w_ij, w_ji = (_floats(args[2:]) + [1.0, 1.0])[:2] if len(args) <= 4 else _floats(args[2:], 2)
        gf.edges.append((i, j))
        gf.weights[i, j] = w_ij
        gf.weights[j, i] = w_ji

    def loop(args):
        i = _node(args[0], n)
        if len(args) > 2:
            raise ValueError("expected at most one weight")
        gf.self_loops.append(i)
        gf.weights[i, i] = _floats(args[1:])[0] if len(args) == 2 else 1.0

    def entry_bound(target: Dict[Pair, float]):
        def parse(args):
            if len(args) != 3:
                raise ValueError("expected `<i> <j> <value>`")
            target[_node(args[0], n), _node(args[1], n)] = float(args[2])

        return parse

    def loop_bound(target: Dict[Pair, float]):
        def parse(args):
            if len(args) != 2:
                raise ValueError("expected `<i> <value>`")
            i = _node(args[0], n)
            target[i, i] = float(args[1])

        return parse

    def bounds(args):
        gf.bounds = tuple(_floats(args, 2))

    def rho_star(args):
        gf.rho_star = np.array(_floats(args, n))

    def seed(args):
        gf.z = np.array(_floats(args, n))

    def alpha(args):
        gf.alpha = _floats(args, 1)[0]

    handlers: Dict[str, Callable[[List[str]], None]] = {
        "e": edge,
        "s": loop,
        "u": entry_bound(gf.upper),
        "l": entry_bound(gf.lower),
        "us": loop_bound(gf.upper),
        "ls": loop_bound(gf.lower),
        "bounds": bounds,
        "rho*": rho_star,
        "z": seed,
        "alpha": alpha,
    }

    for number, tokens in records[1:]:
        key, args = tokens[0], tokens[1:]
        handler = handlers.get(key)
        if handler is None:
            raise ScenarioError(f"Unknown record `{key}`.", path=path, line=number)
        try:
            handler(args)
        except (IndexError, ValueError) as e:
            raise ScenarioError(f"Bad `{key}` record: {e}", path=path, line=number)

    return gf


def read_graph_file(path: PathType) -> GraphFile:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScenarioError(f"Cannot read graph file: {e.strerror}", path=str(path))
    return parse_graph_text(text, path=str(path))


@dataclass
class ScenarioSpec:
    """A run description: the graph to load and the parameters to run it with.

    Flags given on the command line override the values read from a scenario file.
    """

    graph: Optional[Path] = None
    protocol: Optional[str] = None
    alpha: Optional[float] = None
    alpha_margin: Optional[float] = None
    alpha_mode: AlphaMode = None
    z: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None
    c0: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    tol: Optional[float] = None
    max_rounds: Optional[int] = None
    seed: Optional[int] = None
    correction: bool = True
    solver: SolverKind = SolverKind.BREAKPOINTS
    target: Optional[TargetMode] = None
    level: Optional[float] = None
    out: Optional[Path] = None
    path: Optional[str] = None

    def merge(self, **overrides: Any) -> ScenarioSpec:
        """Copy with every non-``None`` override applied."""

        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in overrides.items() if k in known and v is not None})

    def load_graph_file(self) -> GraphFile:
        if self.graph is None:
            raise ScenarioError("No graph given; use --graph or a `graph` line.", path=self.path)
        return read_graph_file(self.graph)


def _vector(args: List[str]) -> np.ndarray:
    if not args:
        raise ValueError("expected at least one value")
    return np.array(_floats(args))


def _flag(args: List[str]) -> bool:
    value = " ".join(args).lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got `{value}`")


SCENARIO_KEYS: Dict[str, Tuple[str, Callable[[List[str]], Any]]] = {
    "graph": ("graph", lambda a: Path(" ".join(a))),
    "protocol": ("protocol", lambda a: a[0]),
    "alpha": ("alpha", lambda a: _floats(a, 1)[0]),
    "alpha-margin": ("alpha_margin", lambda a: _floats(a, 1)[0]),
    "alpha-mode": ("alpha_mode", lambda a: AlphaMode(a[0])),
    "z": ("z", _vector),
    "x0": ("x0", _vector),
    "c0": ("c0", _vector),
    "epsilon": ("epsilon", lambda a: _floats(a, 1)[0]),
    "tol": ("tol", lambda a: _floats(a, 1)[0]),
    "max-rounds": ("max_rounds", lambda a: int(a[0])),
    "seed": ("seed", lambda a: int(a[0])),
    "correction": ("correction", _flag),
    "solver": ("solver", lambda a: SolverKind(a[0])),
    "target": ("target", lambda a: TargetMode(a[0])),
    "level": ("level", lambda a: _floats(a, 1)[0]),
}


def parse_scenario_text(text: str, path: Optional[str] = None, base: Optional[Path] = None) -> ScenarioSpec:
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = shlex.split(line)
        key, args = tokens[0], tokens[1:]
        if key not in SCENARIO_KEYS:
            raise ScenarioError(f"Unknown key `{key}`.", path=path, line=number)
        name, convert = SCENARIO_KEYS[key]
        try:
            values[name] = convert(args)
        except (IndexError, ValueError) as e:
            raise ScenarioError(f"Bad `{key}` value: {e}", path=path, line=number)

    graph = values.get("graph")
    if graph is not None and base is not None and not graph.is_absolute():
        values["graph"] = base / graph
    return ScenarioSpec(path=path, **values)


def read_scenario(path: PathType) -> ScenarioSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario: {e.strerror}", path=str(path))
    return parse_scenario_text(text, path=str(path), base=path.parent)
