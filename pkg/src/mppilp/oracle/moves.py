"""Collision-free synchronous moves and simple-cycle enumeration."""

from __future__ import annotations

from functools import lru_cache

from ..graph import Graph


def enumerate_joint_moves(g: Graph, config) -> set[tuple[int, ...]]:
    """All collision-free successor configurations of ``config`` (identity included).

    Every robot stays or moves to a neighbour; successors must be injective
    and no edge may be crossed in both directions.  Moving robots therefore
    split into vertex-disjoint chains whose head enters an empty vertex and
    fully occupied cycles rotating one way.
    """
    config = tuple(config)
    n = len(config)
    occupied = {v: i for i, v in enumerate(config)}
    options = [(v,) + g.adj[v] for v in config]
    claimed: dict[int, int] = {}
    choice = [0] * n
    out: set[tuple[int, ...]] = set()

    def rec(i):
        if i == n:
            out.add(tuple(choice))
            return
        here = config[i]
        for w in options[i]:
            if w in claimed:
                continue
            if w != here:
                j = occupied.get(w)
                # head-on: the robot at w already chose to come here
                if j is not None and j < i and choice[j] == here:
                    continue
            claimed[w] = i
            choice[i] = w
            rec(i + 1)
            del claimed[w]

    rec(0)
    return out


def joint_move_count(g: Graph, config) -> int:
    """Number of non-identity successors."""
    return len(enumerate_joint_moves(g, config)) - 1


@lru_cache(maxsize=32)
def full_occupancy_moves(g: Graph) -> tuple[tuple[int, ...], ...]:
    """Vertex permutations realisable in one step when every vertex holds a robot.

    On a fully occupied graph the legal steps do not depend on which robot
    sits where, so they can be applied to any configuration as
    ``new[i] = perm[old[i]]``.  The identity is excluded.
    """
    ident = tuple(range(g.vertex_count))
    return tuple(sorted(m for m in enumerate_joint_moves(g, ident) if m != ident))


def enumerate_cycles(g: Graph) -> list[tuple[int, ...]]:
    """All simple cycles (length >= 3), each listed once.

    A cycle is reported starting from its smallest vertex and oriented so
    that the second vertex is smaller than the last one.
    """
    cycles = []
    for s in range(g.vertex_count):
        path = [s]
        on_path = {s}

        def extend(u):
            for w in g.adj[u]:
                if w == s and len(path) >= 3:
                    if path[1] < path[-1]:
                        cycles.append(tuple(path))
                elif w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    path.pop()
                    on_path.discard(w)

        extend(s)
    return sorted(cycles, key=lambda c: (len(c), c))


def rotation(cycle, direction: int = 1) -> dict[int, int]:
    """Map vertex -> next vertex for rotating robots along ``cycle``.

    ``direction=1`` sends each vertex to its successor in the listed order.
    """
    k = len(cycle)
    return {cycle[m]: cycle[(m + direction) % k] for m in range(k)}
