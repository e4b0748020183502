"""Time-expanded flow networks and the plan <-> flow conversions.

Two encodings are supported.  ``full`` follows the original construction:
every vertex gets copies ``v(0), v(1), v(1)', ..., v(T)'`` (``v(0)`` doubles
as ``v(0)'``), a blue arc ``v(t) -> v(t)'`` caps each vertex at one robot, a
green hold arc ``v(t)' -> v(t+1)`` lets a robot wait, and each graph edge gets
a five-arc merge-split gadget per step::

    u(t)' --\\              /--> u(t+1)
             a --(cost 1)--> b
    v(t)' --/              \\--> v(t+1)

``compact`` keeps only ``v(0..T)``, one hold arc per vertex and step, and two
directed move arcs per edge and step; collisions are then excluded by the
extra rows added in :mod:`mppilp.ilp`.

Arc ``j < n`` is always robot ``j``'s loopback arc (goal copy at layer ``T``
back to its start copy at layer 0).  Every other node and arc id is dense and
assigned layer by layer.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .graph import distance_table
from .instances import Instance
from .plan import Plan

FULL = "full"
COMPACT = "compact"

# arc kinds
MOVE = "move"
HOLD = "hold"
BLUE = "blue"
LOOPBACK = "loopback"

# node kinds
MAIN = "v"
PRIME = "v'"
GADGET_IN = "a"
GADGET_OUT = "b"


class FlowError(ValueError):
    """A flow violates capacity or conservation."""

    def __init__(self, message, robot=None, node=None, arc=None):
        super().__init__(message)
        self.robot, self.node, self.arc = robot, node, arc


class CollisionError(ValueError):
    """A plan cannot be embedded because two robots collide."""

    def __init__(self, message, kind, step, robots=(), arc=None, node=None):
        super().__init__(message)
        self.kind = kind  # "meet" or "head-on"
        self.step, self.robots, self.arc, self.node = step, tuple(robots), arc, node


@dataclass
class TimeExpandedNetwork:
    encoding: str
    horizon: int
    n_robots: int
    n_vertices: int
    node_vertex: list = field(default_factory=list)
    node_layer: list = field(default_factory=list)
    node_kind: list = field(default_factory=list)
    arc_tail: list = field(default_factory=list)
    arc_head: list = field(default_factory=list)
    arc_kind: list = field(default_factory=list)
    arc_cost: list = field(default_factory=list)
    arc_step: list = field(default_factory=list)
    arc_edge: list = field(default_factory=list)
    # lookups used by the converters and model builders
    main_node: dict = field(default_factory=dict)     # (v, t) -> node
    prime_node: dict = field(default_factory=dict)    # (v, t) -> node (full only)
    hold_arc: dict = field(default_factory=dict)      # (v, t) -> arc for step t -> t+1
    blue_arc: dict = field(default_factory=dict)      # (v, t) -> arc, 1 <= t <= T
    move_arcs: dict = field(default_factory=dict)     # (u, v, t) -> tuple of arcs used by u->v
    edge_index: dict = field(default_factory=dict)    # (u, v) sorted -> edge id
    sources: tuple = ()
    sinks: tuple = ()

    @property
    def n_nodes(self) -> int:
        return len(self.node_vertex)

    @property
    def n_arcs(self) -> int:
        return len(self.arc_tail)

    @property
    def capacity(self) -> list[int]:
        return [1] * self.n_arcs

    def loopback_arc_of(self, robot: int) -> int:
        return robot

    def out_arcs(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_nodes)]
        for j, u in enumerate(self.arc_tail):
            out[u].append(j)
        return out

    def in_arcs(self) -> list[list[int]]:
        inn = [[] for _ in range(self.n_nodes)]
        for j, v in enumerate(self.arc_head):
            inn[v].append(j)
        return inn

    def kind_counts(self) -> Counter:
        return Counter(self.arc_kind)

    # node helpers -------------------------------------------------------
    def _add_node(self, v, t, kind) -> int:
        self.node_vertex.append(v)
        self.node_layer.append(t)
        self.node_kind.append(kind)
        return len(self.node_vertex) - 1

    def _add_arc(self, tail, head, kind, cost, step, edge=-1) -> int:
        self.arc_tail.append(tail)
        self.arc_head.append(head)
        self.arc_kind.append(kind)
        self.arc_cost.append(cost)
        self.arc_step.append(step)
        self.arc_edge.append(edge)
        return len(self.arc_tail) - 1

    def entry_node(self, v: int, t: int) -> int:
        """Node a robot sitting at ``v`` at time ``t`` leaves from."""
        if self.encoding == FULL and t > 0:
            return self.prime_node[(v, t)]
        return self.main_node[(v, t)]

    def exit_node(self, v: int, t: int) -> int:
        """Last copy of ``v`` at layer ``t`` (the sink side of the blue arc)."""
        return self.entry_node(v, t)


def build_network(inst: Instance, T: int, encoding: str = COMPACT) -> TimeExpandedNetwork:
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    if encoding not in (FULL, COMPACT):
        raise ValueError(f"unknown encoding {encoding!r}")
    g = inst.graph
    V = g.vertex_count
    edges = g.sorted_edges()
    net = TimeExpandedNetwork(encoding, T, inst.n, V)
    net.edge_index = {e: k for k, e in enumerate(edges)}
    # loopback arcs take ids 0..n-1; their endpoints are patched in below
    for i in range(inst.n):
        net._add_arc(-1, -1, LOOPBACK, 0, -1)

    for v in range(V):
        net.main_node[(v, 0)] = net._add_node(v, 0, MAIN)
    if encoding == COMPACT:
        for t in range(T):
            for v in range(V):
                net.main_node[(v, t + 1)] = net._add_node(v, t + 1, MAIN)
            for k, (u, v) in enumerate(edges):
                a = net._add_arc(net.main_node[(u, t)], net.main_node[(v, t + 1)], MOVE, 1, t, k)
                b = net._add_arc(net.main_node[(v, t)], net.main_node[(u, t + 1)], MOVE, 1, t, k)
                net.move_arcs[(u, v, t)] = (a,)
                net.move_arcs[(v, u, t)] = (b,)
            for v in range(V):
                net.hold_arc[(v, t)] = net._add_arc(
                    net.main_node[(v, t)], net.main_node[(v, t + 1)], HOLD, 0, t)
    else:
        for t in range(T):
            gadget = []
            for k in range(len(edges)):
                a = net._add_node(-1, t, GADGET_IN)
                b = net._add_node(-1, t, GADGET_OUT)
                gadget.append((a, b))
            for v in range(V):
                net.main_node[(v, t + 1)] = net._add_node(v, t + 1, MAIN)
            for v in range(V):
                net.prime_node[(v, t + 1)] = net._add_node(v, t + 1, PRIME)
            for k, (u, v) in enumerate(edges):
                a, b = gadget[k]
                ua = net._add_arc(net.entry_node(u, t), a, MOVE, 0, t, k)
                va = net._add_arc(net.entry_node(v, t), a, MOVE, 0, t, k)
                mid = net._add_arc(a, b, MOVE, 1, t, k)
                bu = net._add_arc(b, net.main_node[(u, t + 1)], MOVE, 0, t, k)
                bv = net._add_arc(b, net.main_node[(v, t + 1)], MOVE, 0, t, k)
                net.move_arcs[(u, v, t)] = (ua, mid, bv)
                net.move_arcs[(v, u, t)] = (va, mid, bu)
            for v in range(V):
                net.hold_arc[(v, t)] = net._add_arc(
                    net.entry_node(v, t), net.main_node[(v, t + 1)], HOLD, 0, t)
            for v in range(V):
                net.blue_arc[(v, t + 1)] = net._add_arc(
                    net.main_node[(v, t + 1)], net.prime_node[(v, t + 1)], BLUE, 0, t + 1)

    net.sources = tuple(net.main_node[(s, 0)] for s in inst.starts)
    net.sinks = tuple(net.exit_node(g_, T) for g_ in inst.goals)
    for i in range(inst.n):
        net.arc_tail[i] = net.sinks[i]
        net.arc_head[i] = net.sources[i]
    return net


def reachability_prune(net: TimeExpandedNetwork, inst: Instance) -> list[list[int]]:
    """Per robot, the arcs lying on some start-to-goal walk through the layers.

    A robot whose goal is farther than ``T`` hops gets an empty list.  The
    robot's own loopback arc is included otherwise.
    """
    T = net.horizon
    g = inst.graph
    if net.encoding == COMPACT:
        tails = np.array(net.node_vertex)[np.array(net.arc_tail[inst.n:], dtype=np.int64)] \
            if net.n_arcs > inst.n else np.zeros(0, dtype=np.int64)
        heads = np.array(net.node_vertex)[np.array(net.arc_head[inst.n:], dtype=np.int64)] \
            if net.n_arcs > inst.n else np.zeros(0, dtype=np.int64)
        steps = np.array(net.arc_step[inst.n:], dtype=np.int64)
    out = []
    for i in range(inst.n):
        ds = distance_table(g, inst.starts[i])
        dg = distance_table(g, inst.goals[i])
        if ds[inst.goals[i]] > T:
            out.append([])
            continue
        if net.encoding == COMPACT:
            ds_a, dg_a = np.array(ds), np.array(dg)
            keep = (ds_a[tails] <= steps) & (dg_a[heads] <= T - steps - 1)
            out.append([i] + [int(j) + inst.n for j in np.flatnonzero(keep)])
        else:
            out.append(_prune_by_layers(net, inst, i))
    return out


def _prune_by_layers(net: TimeExpandedNetwork, inst: Instance, robot: int) -> list[int]:
    n = inst.n
    outs = net.out_arcs()
    ins = net.in_arcs()
    src, snk = net.sources[robot], net.sinks[robot]

    def sweep(start, adjacency, endpoint):
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for j in adjacency[u]:
                if j < n:
                    continue
                w = endpoint[j]
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    fwd = sweep(src, outs, net.arc_head)
    bwd = sweep(snk, ins, net.arc_tail)
    if snk not in fwd:
        return []
    kept = [j for j in range(n, net.n_arcs) if net.arc_tail[j] in fwd and net.arc_head[j] in bwd]
    return [robot] + kept


@dataclass(frozen=True)
class FlowAssignment:
    """Per robot, the set of arcs carrying its unit of flow."""

    arcs: tuple

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(frozenset(a) for a in self.arcs))


def check_flow(net: TimeExpandedNetwork, flow: FlowAssignment) -> None:
    load = Counter(j for arcs in flow.arcs for j in arcs)
    for j, c in sorted(load.items()):
        if c > 1:
            raise FlowError(f"arc {j} ({net.arc_kind[j]}) carries {c} units", arc=j)
    for i, arcs in enumerate(flow.arcs):
        balance = Counter()
        for j in arcs:
            if j < net.n_robots and j != i:
                raise FlowError(f"robot {i} uses the loopback arc of robot {j}", robot=i, arc=j)
            balance[net.arc_tail[j]] -= 1
            balance[net.arc_head[j]] += 1
        for node, b in sorted(balance.items()):
            if b != 0:
                raise FlowError(f"flow of robot {i} is not conserved at node {node}",
                                robot=i, node=node)


def flow_to_paths(net: TimeExpandedNetwork, flow: FlowAssignment, inst: Instance) -> Plan:
    """Read each robot's unit flow off the network as a scheduled path."""
    check_flow(net, flow)
    T = net.horizon
    outs = net.out_arcs()
    paths = []
    for i, arcs in enumerate(flow.arcs):
        if i not in arcs:
            raise FlowError(f"robot {i} does not use its loopback arc", robot=i, arc=i)
        node = net.sources[i]
        path = [net.node_vertex[node]]
        visited = {i}
        while node != net.sinks[i]:
            nxt = [j for j in outs[node] if j in arcs]
            if len(nxt) != 1:
                raise FlowError(f"robot {i} has {len(nxt)} outgoing arcs at node {node}",
                                robot=i, node=node)
            j = nxt[0]
            visited.add(j)
            node = net.arc_head[j]
            if net.node_kind[node] == MAIN:
                path.append(net.node_vertex[node])
        if len(path) != T + 1:
            raise FlowError(f"robot {i} flow has {len(path) - 1} steps, expected {T}", robot=i)
        if visited != set(arcs):
            raise FlowError(f"robot {i} carries flow on a detached cycle", robot=i)
        paths.append(tuple(path))
    return Plan(tuple(paths))


def paths_to_flow(plan: Plan, net: TimeExpandedNetwork, inst: Instance) -> FlowAssignment:
    """Embed a plan into ``net``; collisions surface as the violated structure.

    The plan is embedded step by step so that the earliest collision is the
    one reported: within step ``t`` move arcs are claimed first (an
    exchange happens during the step), then hold and blue arcs (robots
    sharing a vertex at ``t+1``).
    """
    T = net.horizon
    if plan.horizon != T:
        raise ValueError(f"plan horizon {plan.horizon} != network horizon {T}")
    if plan.n != inst.n:
        raise ValueError("plan and instance disagree on the robot count")
    for i, p in enumerate(plan.paths):
        if p[0] != inst.starts[i] or p[-1] != inst.goals[i]:
            raise ValueError(f"robot {i} path does not run from its start to its goal")
    flows = [[i] for i in range(plan.n)]
    owner: dict[int, int] = {}

    def claim(i, j, t, kind):
        if j in owner:
            other = owner[j]
            raise CollisionError(
                f"robots {other} and {i} over capacity on arc {j} ({net.arc_kind[j]}) at step {t}",
                kind, t if kind == "head-on" else t + 1, (other, i), arc=j)
        owner[j] = i
        flows[i].append(j)

    for t in range(T):
        for i, p in enumerate(plan.paths):
            u, v = p[t], p[t + 1]
            if u == v:
                continue
            if (u, v, t) not in net.move_arcs:
                raise ValueError(f"robot {i} jumps from {u} to {v} at step {t}")
            for j in net.move_arcs[(u, v, t)]:
                claim(i, j, t, "head-on")
        if net.encoding == COMPACT:
            _compact_rows_check(plan, net, t)
        for i, p in enumerate(plan.paths):
            u, v = p[t], p[t + 1]
            if u == v:
                claim(i, net.hold_arc[(u, t)], t, "meet")
            if net.encoding == FULL:
                claim(i, net.blue_arc[(v, t + 1)], t, "meet")
    return FlowAssignment(tuple(flows))


def _compact_rows_check(plan: Plan, net: TimeExpandedNetwork, t: int) -> None:
    # the compact network has no arcs enforcing meet/head-on; mirror its rows for step t
    moves = {}
    for i, p in enumerate(plan.paths):
        if p[t] != p[t + 1]:
            moves[(p[t], p[t + 1])] = i
    for (u, v), i in sorted(moves.items(), key=lambda kv: kv[1]):
        j = moves.get((v, u))
        if j is not None and j < i:
            raise CollisionError(f"robots {j} and {i} swap along ({u}, {v}) at step {t}",
                                 "head-on", t, (j, i), arc=net.move_arcs[(u, v, t)][0])
    seen = {}
    for i, p in enumerate(plan.paths):
        w = p[t + 1]
        if w in seen:
            raise CollisionError(f"robots {seen[w]} and {i} meet at vertex {w} at time {t + 1}",
                                 "meet", t + 1, (seen[w], i), node=net.main_node[(w, t + 1)])
        seen[w] = i
