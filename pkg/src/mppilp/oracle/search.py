"""Exact search over joint configurations: BFS makespan and tiny-instance exhaustive optima."""

from __future__ import annotations

from dataclasses import dataclass

from ..graph import distance_table
from ..instances import Instance
from ..plan import Plan
from .moves import enumerate_joint_moves, full_occupancy_moves

SOLVED = "solved"
UNSOLVABLE = "unsolvable"
UNKNOWN = "unknown"

OBJECTIVES = ("makespan", "maxdist", "totaltime", "totaldist")
DEFAULT_NODE_CAP = 20_000_000


@dataclass(frozen=True)
class SearchResult:
    status: str
    value: int | None = None
    plan: Plan | None = None
    explored: int = 0


def _encode(config) -> bytes:
    # canonical key for an injective robot -> vertex map (vertex ids < 256 here)
    return bytes(config)


def _walk_back(parent, key):
    seq = [key]
    while parent[key] is not None:
        key = parent[key]
        seq.append(key)
    seq.reverse()
    return seq


def bfs_min_makespan(inst: Instance, node_cap: int = DEFAULT_NODE_CAP) -> SearchResult:
    """Breadth-first search over configurations for the optimal makespan."""
    g = inst.graph
    if g.vertex_count > 256:
        raise ValueError("configuration encoding supports at most 256 vertices")
    start, goal = _encode(inst.starts), _encode(inst.goals)
    if start == goal:
        return SearchResult(SOLVED, 0, Plan(tuple((s,) for s in inst.starts)), 1)

    if inst.n == g.vertex_count:
        tail = bytes(range(g.vertex_count, 256))
        tables = [bytes(p) + tail for p in full_occupancy_moves(g)]

        def successors(key):
            return [key.translate(t) for t in tables]
    else:
        def successors(key):
            return [bytes(c) for c in enumerate_joint_moves(g, key)]

    parent = {start: None}
    frontier = [start]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for key in frontier:
            for s in successors(key):
                if s in parent:
                    continue
                parent[s] = key
                if s == goal:
                    configs = [tuple(k) for k in _walk_back(parent, s)]
                    return SearchResult(SOLVED, depth, Plan.from_configs(configs), len(parent))
                if len(parent) >= node_cap:
                    return SearchResult(UNKNOWN, None, None, len(parent))
                nxt.append(s)
        frontier = nxt
    return SearchResult(UNSOLVABLE, None, None, len(parent))


class _Moves:
    def __init__(self, inst):
        self.g = inst.graph
        self.cache = {}

    def __call__(self, config):
        out = self.cache.get(config)
        if out is None:
            out = sorted(enumerate_joint_moves(self.g, config))
            self.cache[config] = out
        return out


def exhaustive_optimal(inst: Instance, objective: str, T_cap: int = 30) -> SearchResult:
    """Exact optimum of ``objective`` over plans of horizon at most ``T_cap``.

    Arrival uses stabilisation time: a robot may pass its goal and leave again.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    start, goal = tuple(inst.starts), tuple(inst.goals)
    if start == goal:
        return SearchResult(SOLVED, 0, Plan(tuple((s,) for s in start)), 1)
    if objective == "makespan":
        res = bfs_min_makespan(inst)
        if res.status == SOLVED and res.value > T_cap:
            return SearchResult(UNKNOWN, None, None, res.explored)
        if res.status == UNSOLVABLE:
            return SearchResult(UNKNOWN, None, None, res.explored)
        return res
    moves = _Moves(inst)
    if objective == "totaldist":
        return _layered_totaldist(inst, moves, T_cap)
    if objective == "totaltime":
        return _layered_totaltime(inst, moves, T_cap)
    return _maxdist(inst, moves, T_cap)


def _layered_totaldist(inst, moves, T_cap):
    start, goal = tuple(inst.starts), tuple(inst.goals)
    layer = {start: 0}
    parents = [{start: None}]
    best = best_t = None
    explored = 1
    for t in range(1, T_cap + 1):
        nxt, par = {}, {}
        for c in sorted(layer):
            cost = layer[c]
            for c2 in moves(c):
                v = cost + sum(1 for a, b in zip(c, c2) if a != b)
                if c2 not in nxt or v < nxt[c2]:
                    nxt[c2] = v
                    par[c2] = c
        explored += len(nxt)
        parents.append(par)
        if goal in nxt and (best is None or nxt[goal] < best):
            best, best_t = nxt[goal], t
        if nxt == layer:
            break  # staying is free, so the layers have converged
        layer = nxt
    if best is None:
        return SearchResult(UNKNOWN, None, None, explored)
    return SearchResult(SOLVED, best, _rebuild(parents, goal, best_t, lambda s: s), explored)


def _layered_totaltime(inst, moves, T_cap):
    n = inst.n
    start, goal = tuple(inst.starts), tuple(inst.goals)
    full = (1 << n) - 1

    def at_goal(c):
        return sum(1 << i for i in range(n) if c[i] == goal[i])

    def subsets_between(lo, hi):
        extra = hi & ~lo
        sub = extra
        while True:
            yield lo | sub
            if sub == 0:
                return
            sub = (sub - 1) & extra

    layer, par0 = {}, {}
    for F in subsets_between(0, at_goal(start)):
        layer[(start, F)] = 0
        par0[(start, F)] = None
    parents = [par0]
    best = best_t = None
    explored = len(layer)
    for t in range(1, T_cap + 1):
        nxt, par = {}, {}
        for state in sorted(layer):
            c, F = state
            cost = layer[state] + n - bin(F).count("1")
            for c2 in moves(c):
                if any(c2[i] != c[i] for i in range(n) if F >> i & 1):
                    continue
                for F2 in subsets_between(F, at_goal(c2)):
                    key = (c2, F2)
                    if key not in nxt or cost < nxt[key]:
                        nxt[key] = cost
                        par[key] = state
        explored += len(nxt)
        parents.append(par)
        done = nxt.get((goal, full))
        if done is not None and (best is None or done < best):
            best, best_t = done, t
        rest = [v for k, v in nxt.items() if k[1] != full]
        if not rest or (best is not None and min(rest) >= best):
            break  # every unfinished state already costs at least the incumbent
        layer = nxt
    if best is None:
        return SearchResult(UNKNOWN, None, None, explored)
    plan = _rebuild(parents, (goal, full), best_t, lambda s: s[0])
    return SearchResult(SOLVED, best, plan, explored)


def _rebuild(parents, key, t_end, config_of):
    seq = []
    for t in range(t_end, -1, -1):
        seq.append(config_of(key))
        key = parents[t][key]
    seq.reverse()
    return Plan.from_configs(seq)


def _maxdist(inst, moves, T_cap):
    """Smallest per-robot distance budget D admitting a plan within the horizon."""
    start, goal = tuple(inst.starts), tuple(inst.goals)
    g, n = inst.graph, inst.n
    lb = max(distance_table(g, s)[t] for s, t in zip(start, goal))
    explored = 0
    for D in range(lb, T_cap + 1):
        root = (start, (0,) * n)
        parent = {root: None}
        frontier = [root]
        explored += 1
        found = None
        for _ in range(T_cap):
            nxt = []
            for state in frontier:
                c, d = state
                for c2 in moves(c):
                    d2 = tuple(x + (a != b) for x, a, b in zip(d, c, c2))
                    if max(d2) > D:
                        continue
                    key = (c2, d2)
                    if key in parent:
                        continue
                    parent[key] = state
                    nxt.append(key)
                    if c2 == goal:
                        found = key
                        break
                if found:
                    break
            explored += len(nxt)
            if found or not nxt:
                break
            frontier = nxt
        if found:
            configs = [s[0] for s in _walk_back(parent, found)]
            return SearchResult(SOLVED, max(found[1]), Plan.from_configs(configs), explored)
    return SearchResult(UNKNOWN, None, None, explored)
