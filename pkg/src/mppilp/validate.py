"""Plan validation, objective metrics and static rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .instances import Instance
from .plan import Plan

# rule names used in violations
START = "start"
GOAL = "goal"
ADJACENCY = "adjacency"
MEET = "meet"
HEAD_ON = "head-on"
SHAPE = "shape"


@dataclass(frozen=True)
class Violation:
    rule: str
    step: int
    robots: tuple
    detail: str = ""

    def __str__(self):
        who = ",".join(str(r) for r in self.robots)
        return f"{self.rule} at t={self.step} robots={who}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class Metrics:
    makespan: int
    max_distance: int
    total_time: int
    total_distance: int

    def value(self, objective: str) -> int:
        return {"makespan": self.makespan, "maxdist": self.max_distance,
                "totaltime": self.total_time, "totaldist": self.total_distance}[objective]


class InvalidPlanError(ValueError):
    pass


def validate(plan: Plan, inst: Instance) -> list[Violation]:
    """Every broken rule of the plan, in time order."""
    out: list[Violation] = []
    if plan.n != inst.n:
        return [Violation(SHAPE, 0, (), f"plan has {plan.n} robots, instance has {inst.n}")]
    g = inst.graph
    T = plan.horizon
    for i, p in enumerate(plan.paths):
        if p[0] != inst.starts[i]:
            out.append(Violation(START, 0, (i,), f"starts at {p[0]}, expected {inst.starts[i]}"))
        if p[T] != inst.goals[i]:
            out.append(Violation(GOAL, T, (i,), f"ends at {p[T]}, expected {inst.goals[i]}"))
        if any(not 0 <= v < g.vertex_count for v in p):
            out.append(Violation(SHAPE, 0, (i,), "path leaves the vertex set"))
            return out
    for t in range(T + 1):
        seen: dict[int, int] = {}
        for i, p in enumerate(plan.paths):
            v = p[t]
            if v in seen:
                out.append(Violation(MEET, t, (seen[v], i), f"both at vertex {v}"))
            else:
                seen[v] = i
        if t == T:
            break
        for i, p in enumerate(plan.paths):
            u, v = p[t], p[t + 1]
            if u != v and not g.has_edge(u, v):
                out.append(Violation(ADJACENCY, t, (i,), f"{u} -> {v} is not an edge"))
        at_t = {p[t]: i for i, p in enumerate(plan.paths)}
        for i, p in enumerate(plan.paths):
            u, v = p[t], p[t + 1]
            j = at_t.get(v)
            if u != v and j is not None and j > i and plan.paths[j][t + 1] == u:
                out.append(Violation(HEAD_ON, t, (i, j), f"exchange along {min(u, v)}-{max(u, v)}"))
    return out


def metrics(plan: Plan, inst: Instance | None = None) -> Metrics:
    """Objective values with stabilisation-time arrival.

    With ``inst`` given, the plan is validated first and rejected if broken.
    """
    if inst is not None:
        bad = validate(plan, inst)
        if bad:
            raise InvalidPlanError(str(bad[0]))
    arrive = plan.arrival_times()
    lengths = plan.lengths()
    return Metrics(max(arrive, default=0), max(lengths, default=0), sum(arrive), sum(lengths))


def _base36(i: int) -> str:
    digits = "0123456789abcdefghijklmnopqrstuvwxyz"
    if i < 36:
        return digits[i]
    out = ""
    while i:
        i, d = divmod(i, 36)
        out = digits[d] + out
    return out


def render(plan: Plan, inst: Instance, fmt: str = "ascii") -> list[bytes]:
    """One frame per time step of the trimmed plan."""
    plan = plan.trimmed()
    if fmt == "ascii":
        return [_ascii_frame(plan, inst, t) for t in range(plan.horizon + 1)]
    if fmt == "svg":
        return [_svg_frame(plan, inst, t) for t in range(plan.horizon + 1)]
    raise ValueError(f"unknown render format {fmt!r}")


def _ascii_frame(plan: Plan, inst: Instance, t: int) -> bytes:
    g = inst.graph
    occupant = {v: i for i, v in enumerate(plan.at(t))}
    width = max(1, len(_base36(max(plan.n - 1, 0))))
    lines = [f"t={t}"]
    if g.grid is not None:
        grid = g.grid
        vid = {cell: k for k, cell in enumerate(grid.cells())}
        for r in range(grid.rows):
            row = []
            for c in range(grid.cols):
                cell = r * grid.cols + c
                if cell in grid.removed:
                    row.append("#".rjust(width))
                elif vid[cell] in occupant:
                    row.append(_base36(occupant[vid[cell]]).rjust(width))
                else:
                    row.append(".".rjust(width))
            lines.append(" ".join(row))
    else:
        row = []
        for v in range(g.vertex_count):
            row.append(_base36(occupant[v]).rjust(width) if v in occupant else ".".rjust(width))
        lines.append(" ".join(row))
    return ("\n".join(lines) + "\n").encode("ascii")


def _layout(inst: Instance):
    g = inst.graph
    if g.grid is not None:
        cells = g.grid.cells()
        return {k: (40 + 60 * (cell % g.grid.cols), 40 + 60 * (cell // g.grid.cols))
                for k, cell in enumerate(cells)}
    nv = g.vertex_count
    radius = 30 * max(3, nv) / math.pi
    centre = radius + 40
    return {v: (round(centre + radius * math.cos(2 * math.pi * v / nv - math.pi / 2), 2),
                round(centre + radius * math.sin(2 * math.pi * v / nv - math.pi / 2), 2))
            for v in range(nv)}


def _svg_frame(plan: Plan, inst: Instance, t: int) -> bytes:
    g = inst.graph
    pos = _layout(inst)
    w = max(x for x, _ in pos.values()) + 40
    h = max(y for _, y in pos.values()) + 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        '<defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto">'
        '<path d="M0,0 L8,4 L0,8 z" fill="#c0392b"/></marker></defs>',
        f'<title>{escape(f"t={t}")}</title>',
    ]
    for u, v in g.sorted_edges():
        (x1, y1), (x2, y2) = pos[u], pos[v]
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#bbbbbb" stroke-width="2"/>')
    for v in range(g.vertex_count):
        x, y = pos[v]
        out.append(f'<circle cx="{x}" cy="{y}" r="16" fill="white" stroke="#888888"/>')
    if t < plan.horizon:
        for i, p in enumerate(plan.paths):
            u, v = p[t], p[t + 1]
            if u == v:
                continue
            (x1, y1), (x2, y2) = pos[u], pos[v]
            dx, dy = x2 - x1, y2 - y1
            d = math.hypot(dx, dy) or 1.0
            sx, sy = x1 + dx * 17 / d, y1 + dy * 17 / d
            ex, ey = x2 - dx * 19 / d, y2 - dy * 19 / d
            out.append(f'<line x1="{sx:.2f}" y1="{sy:.2f}" x2="{ex:.2f}" y2="{ey:.2f}" '
                       f'stroke="#c0392b" stroke-width="2" marker-end="url(#arrow)"/>')
    for i, v in enumerate(plan.at(t)):
        x, y = pos[v]
        out.append(f'<circle cx="{x}" cy="{y}" r="13" fill="#4a90d9"/>')
        out.append(f'<text x="{x}" y="{y}" font-size="12" text-anchor="middle" '
                   f'dominant-baseline="central" fill="white">{_base36(i)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
