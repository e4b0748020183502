"""Undirected simple graphs, 4-connected grids and breadth-first distances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GenerationError(RuntimeError):
    """Raised when a random arena or instance cannot be produced."""


@dataclass(frozen=True)
class GridInfo:
    rows: int
    cols: int
    removed: frozenset = frozenset()

    def cells(self) -> list[int]:
        """Row-major cell indices that still carry a vertex."""
        return [c for c in range(self.rows * self.cols) if c not in self.removed]


@dataclass(frozen=True)
class Graph:
    """An undirected simple graph on vertices ``0..vertex_count-1``.

    Edges are stored as sorted pairs ``(u, v)`` with ``u < v``.  Grids carry a
    :class:`GridInfo` so that vertex ``i`` can be mapped back onto the ``i``-th
    surviving cell in row-major order.
    """

    vertex_count: int
    edges: frozenset
    grid: GridInfo | None = None
    adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) is not a sorted pair of known vertices")
            nbrs[u].append(v)
            nbrs[v].append(u)
        object.__setattr__(self, "adj", tuple(tuple(sorted(n)) for n in nbrs))

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]],
                   grid: GridInfo | None = None) -> "Graph":
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            canon.add((min(u, v), max(u, v)))
        return cls(vertex_count, frozenset(canon), grid)

    @property
    def n_vertices(self) -> int:
        return self.vertex_count

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return True
        return len(bfs_distances(self, 0)) == self.vertex_count

    def cell_of(self, v: int) -> tuple[int, int] | None:
        """(row, col) of vertex ``v`` for grid graphs, else None."""
        if self.grid is None:
            return None
        cell = self.grid.cells()[v]
        return divmod(cell, self.grid.cols)


def make_grid(rows: int, cols: int) -> Graph:
    """The ``rows x cols`` 4-connected grid with row-major vertex numbering."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, frozenset(edges), GridInfo(rows, cols))


def induced_subgraph(g: Graph, keep: Sequence[int]) -> Graph:
    """Subgraph on ``keep`` (relabelled in ascending order of the old labels)."""
    keep = sorted(keep)
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    grid = None
    if g.grid is not None:
        cells = g.grid.cells()
        kept_cells = {cells[v] for v in keep}
        removed = frozenset(c for c in range(g.grid.rows * g.grid.cols) if c not in kept_cells)
        grid = GridInfo(g.grid.rows, g.grid.cols, removed)
    return Graph(len(keep), frozenset(edges), grid)


def _connected_without(g: Graph, alive: np.ndarray, drop: int, remaining: int) -> bool:
    start = next((v for v in range(g.vertex_count) if alive[v] and v != drop), None)
    if start is None:
        return True
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w != drop and alive[w] and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == remaining - 1


def remove_obstacles(g: Graph, fraction: float, seed: int) -> Graph:
    """Delete ``floor(fraction * |V|)`` random vertices while keeping ``g`` connected.

    Candidates are drawn uniformly from the surviving vertices with numpy's
    PCG64 generator seeded by ``seed``; a draw whose removal would disconnect
    the graph is rejected.  At most ``100 * |V|`` draws are made.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("obstacle fraction must lie in [0, 1)")
    quota = int(np.floor(fraction * g.vertex_count + 1e-9))
    if quota >= g.vertex_count and g.vertex_count > 0:
        raise ValueError("cannot remove every vertex")
    if quota == 0:
        return g
    rng = np.random.default_rng(seed)
    alive = np.ones(g.vertex_count, dtype=bool)
    remaining = g.vertex_count
    removed = 0
    for _ in range(100 * g.vertex_count):
        if removed == quota:
            break
        candidates = np.flatnonzero(alive)
        v = int(candidates[rng.integers(len(candidates))])
        if _connected_without(g, alive, v, remaining):
            alive[v] = False
            remaining -= 1
            removed += 1
    if removed < quota:
        raise GenerationError(
            f"could only remove {removed} of {quota} vertices without disconnecting the graph")
    return induced_subgraph(g, [int(v) for v in np.flatnonzero(alive)])


def bfs_distances(g: Graph, src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def distance_table(g: Graph, src: int) -> list[int]:
    """Hop distances from ``src`` as a dense list (-1 for unreachable)."""
    out = [-1] * g.vertex_count
    for v, d in bfs_distances(g, src).items():
        out[v] = d
    return out


def shortest_path(g: Graph, src: int, dst: int) -> list[int]:
    """A BFS shortest path; neighbours are expanded in increasing index order."""
    for v in (src, dst):
        if not 0 <= v < g.vertex_count:
            raise IndexError(f"vertex {v} out of range")
    parent = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for w in g.adj[u]:
            if w not in parent:
                parent[w] = u
                queue.append(w)
    if dst not in parent:
        raise ValueError(f"no path from {src} to {dst}")
    path = [dst]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]
