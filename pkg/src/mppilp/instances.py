"""MPP instances: random generation and the line-oriented text formats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, GridInfo
from .plan import Plan


class InstanceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    starts: tuple
    goals: tuple

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(int(v) for v in self.starts))
        object.__setattr__(self, "goals", tuple(int(v) for v in self.goals))
        check_instance(self)

    @property
    def n(self) -> int:
        return len(self.starts)


def check_instance(inst: Instance) -> None:
    V = inst.graph.vertex_count
    if len(inst.starts) != len(inst.goals):
        raise ValueError("start and goal configurations differ in size")
    if inst.n > V:
        raise ValueError(f"{inst.n} robots do not fit on {V} vertices")
    for name, conf in (("start", inst.starts), ("goal", inst.goals)):
        if any(not 0 <= v < V for v in conf):
            raise ValueError(f"{name} configuration references an unknown vertex")
        if len(set(conf)) != len(conf):
            raise ValueError(f"{name} configuration is not injective")


def generate_instance(g: Graph, n: int, seed: int) -> Instance:
    """Uniform random distinct starts and, independently, distinct goals."""
    if not 1 <= n <= g.vertex_count:
        raise ValueError(f"need 1 <= n <= |V| = {g.vertex_count}, got {n}")
    rng = np.random.default_rng(seed)
    starts = rng.choice(g.vertex_count, size=n, replace=False)
    goals = rng.choice(g.vertex_count, size=n, replace=False)
    return Instance(g, tuple(int(v) for v in starts), tuple(int(v) for v in goals))


def serialize_instance(inst: Instance) -> bytes:
    g = inst.graph
    lines = ["mpp 1", f"vertices {g.vertex_count}", f"edges {len(g.edges)}"]
    lines += [f"{u} {v}" for u, v in g.sorted_edges()]
    lines.append(f"robots {inst.n}")
    lines += [f"{s} {t}" for s, t in zip(inst.starts, inst.goals)]
    if g.grid is not None:
        lines.append(f"grid {g.grid.rows} {g.grid.cols}")
        lines.append(f"removed {len(g.grid.removed)}")
        lines += [str(c) for c in sorted(g.grid.removed)]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _content_lines(text: bytes | str):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


class _Reader:
    def __init__(self, text):
        self._lines = list(_content_lines(text))
        self._pos = 0

    @property
    def last_line(self):
        return self._lines[-1][0] if self._lines else 1

    def done(self) -> bool:
        return self._pos >= len(self._lines)

    def next(self, what: str):
        if self.done():
            raise InstanceFormatError(f"unexpected end of file, expected {what}", self.last_line)
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def header(self, keyword: str, arity: int = 1):
        lineno, toks = self.next(f"'{keyword}' header")
        if toks[0] != keyword or len(toks) != arity + 1:
            raise InstanceFormatError(f"expected '{keyword}' header, got {' '.join(toks)!r}", lineno)
        return lineno, [_int(t, lineno) for t in toks[1:]]

    def ints(self, count: int, what: str):
        lineno, toks = self.next(what)
        if len(toks) != count:
            raise InstanceFormatError(f"expected {count} integers for {what}", lineno)
        return lineno, [_int(t, lineno) for t in toks]


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InstanceFormatError(f"not an integer: {tok!r}", lineno) from None


def parse_instance(text: bytes | str) -> Instance:
    rd = _Reader(text)
    lineno, toks = rd.next("'mpp 1' header")
    if toks != ["mpp", "1"]:
        raise InstanceFormatError("missing 'mpp 1' header", lineno)
    _, (V,) = rd.header("vertices")
    if V < 0:
        raise InstanceFormatError("negative vertex count", lineno)
    _, (E,) = rd.header("edges")
    edges = set()
    for _ in range(E):
        ln, (u, v) = rd.ints(2, "edge")
        if not (0 <= u < V and 0 <= v < V):
            raise InstanceFormatError(f"edge ({u}, {v}) references an unknown vertex", ln)
        if u == v:
            raise InstanceFormatError(f"self-loop at {u}", ln)
        if (min(u, v), max(u, v)) in edges:
            raise InstanceFormatError(f"duplicate edge ({u}, {v})", ln)
        edges.add((min(u, v), max(u, v)))
    robots_line, (n,) = rd.header("robots")
    starts, goals = [], []
    seen_s, seen_g = {}, {}
    for _ in range(n):
        ln, (s, t) = rd.ints(2, "robot")
        for v in (s, t):
            if not 0 <= v < V:
                raise InstanceFormatError(f"robot references unknown vertex {v}", ln)
        if s in seen_s:
            raise InstanceFormatError(f"start vertex {s} used twice (also line {seen_s[s]}): "
                                      "start configuration not injective", ln)
        if t in seen_g:
            raise InstanceFormatError(f"goal vertex {t} used twice (also line {seen_g[t]}): "
                                      "goal configuration not injective", ln)
        seen_s[s], seen_g[t] = ln, ln
        starts.append(s)
        goals.append(t)
    grid = None
    if not rd.done():
        ln, (rows, cols) = rd.header("grid", 2)
        _, (k,) = rd.header("removed")
        removed = set()
        for _ in range(k):
            cl, (c,) = rd.ints(1, "removed cell")
            if not 0 <= c < rows * cols:
                raise InstanceFormatError(f"removed cell {c} outside the grid", cl)
            removed.add(c)
        if rows * cols - len(removed) != V:
            raise InstanceFormatError("grid metadata does not match the vertex count", ln)
        grid = GridInfo(rows, cols, frozenset(removed))
    if not rd.done():
        ln, _ = rd.next("end of file")
        raise InstanceFormatError("trailing content", ln)
    g = Graph(V, frozenset(edges), grid)
    if not g.is_connected():
        raise InstanceFormatError("graph is not connected", robots_line)
    return Instance(g, tuple(starts), tuple(goals))


def serialize_plan(plan: Plan) -> bytes:
    lines = [f"plan {plan.n} {plan.horizon}"]
    lines += [" ".join(str(v) for v in p) for p in plan.paths]
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_plan(text: bytes | str) -> Plan:
    rd = _Reader(text)
    ln, (n, T) = rd.header("plan", 2)
    paths = []
    for _ in range(n):
        pl, path = rd.ints(T + 1, "robot path")
        paths.append(tuple(path))
    if not rd.done():
        ln, _ = rd.next("end of file")
        raise InstanceFormatError("trailing content", ln)
    if n == 0:
        return Plan(())
    return Plan(tuple(paths))
