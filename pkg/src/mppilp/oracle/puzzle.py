"""Constructive (non-optimal) solver for fully occupied N x N grids.

The grid is peeled one row and one column at a time: top-row robots are
placed left to right, then left-column robots top to bottom, the last two
of each line together.  Placement is a small BFS over the positions of the
robots being placed, using rotations of 2x2 squares and 2x3 / 3x2
rectangles inside the cells that are not yet locked.  The remaining 3x3
is solved by centring its middle robot and sorting the border ring with
3-step adjacent exchanges.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from itertools import product

from ..instances import Instance
from ..plan import Plan


class PuzzleError(ValueError):
    pass


def _rect_cycle(r, c, h, w):
    """Boundary of the h x w rectangle with top-left (r, c), clockwise."""
    cells = [(r, c + j) for j in range(w)]
    cells += [(r + i, c + w - 1) for i in range(1, h)]
    cells += [(r + h - 1, c + j) for j in range(w - 2, -1, -1)]
    cells += [(r + i, c) for i in range(h - 2, 0, -1)]
    return tuple(cells)


def _region_cycles(region):
    out = []
    for (r, c) in sorted(region):
        for h, w in ((2, 2), (2, 3), (3, 2)):
            cyc = _rect_cycle(r, c, h, w)
            if all(cell in region for cell in cyc):
                out.append(cyc)
    return out


def _rotation_map(cycle, direction):
    k = len(cycle)
    return {cycle[m]: cycle[(m + direction) % k] for m in range(k)}


def _place(tracked_pos, targets, region):
    """Shortest rotation sequence moving the tracked robots onto their targets."""
    start, goal = tuple(tracked_pos), tuple(targets)
    if start == goal:
        return []
    moves = [_rotation_map(c, d) for c in _region_cycles(region) for d in (1, -1)]
    parent = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for k, mp in enumerate(moves):
            nxt = tuple(mp.get(p, p) for p in s)
            if nxt in parent:
                continue
            parent[nxt] = (s, k)
            if nxt == goal:
                seq = []
                while parent[nxt] is not None:
                    nxt, k = parent[nxt]
                    seq.append(moves[k])
                return seq[::-1]
            queue.append(nxt)
    raise PuzzleError(f"cannot place robots at {goal} inside the free region")


class _Board:
    def __init__(self, n, starts, goals):
        self.n = n
        self.pos = [divmod(v, n) for v in starts]
        self.goal = [divmod(v, n) for v in goals]
        self.at = {p: i for i, p in enumerate(self.pos)}
        self.robot_for = {g: i for i, g in enumerate(self.goal)}
        self.configs = [tuple(starts)]

    def apply(self, mp):
        new_at = {}
        for cell, i in self.at.items():
            dst = mp.get(cell, cell)
            self.pos[i] = dst
            new_at[dst] = i
        self.at = new_at
        self.configs.append(tuple(r * self.n + c for r, c in self.pos))

    def place(self, cells, region):
        robots = [self.robot_for[c] for c in cells]
        for mp in _place([self.pos[i] for i in robots], cells, region):
            self.apply(mp)


@lru_cache(maxsize=1)
def _exchange_macros():
    """3-step move sequences on a 3x3 that swap two adjacent border cells and fix the rest."""
    cells = [(r, c) for r in range(3) for c in range(3)]
    region = set(cells)
    cycles = [_rect_cycle(0, 0, 3, 3)]
    for (r, c) in cells:
        for h, w in ((2, 2), (2, 3), (3, 2)):
            cyc = _rect_cycle(r, c, h, w)
            if all(x in region for x in cyc):
                cycles.append(cyc)
    moves = [_rotation_map(c, d) for c in cycles for d in (1, -1)]
    ring = _ring()
    out = {}
    for seq in product(range(len(moves)), repeat=3):
        perm = {x: x for x in cells}
        for k in seq:
            perm = {x: moves[k].get(y, y) for x, y in perm.items()}
        moved = [x for x in cells if perm[x] != x]
        if len(moved) != 2:
            continue
        a, b = moved
        if a not in ring or b not in ring:
            continue
        ia, ib = ring.index(a), ring.index(b)
        if (ia - ib) % 8 not in (1, 7):
            continue
        key = frozenset((a, b))
        if key not in out:
            out[key] = tuple(moves[k] for k in seq)
    return out


def _ring():
    return list(_rect_cycle(0, 0, 3, 3))


def _shift(mp, r0, c0):
    return {(r + r0, c + c0): (r2 + r0, c2 + c0) for (r, c), (r2, c2) in mp.items()}


def _solve_base(board, r0, c0):
    region = {(r0 + r, c0 + c) for r in range(3) for c in range(3)}
    board.place([(r0 + 1, c0 + 1)], region)
    macros = _exchange_macros()
    ring = [(r + r0, c + c0) for r, c in _ring()]
    # bubble sort the ring positions 0..7 by where their robots belong
    want = {cell: k for k, cell in enumerate(ring)}
    changed = True
    while changed:
        changed = False
        for k in range(7):
            a, b = ring[k], ring[k + 1]
            if want[board.goal[board.at[a]]] > want[board.goal[board.at[b]]]:
                for mp in macros[frozenset(((a[0] - r0, a[1] - c0), (b[0] - r0, b[1] - c0)))]:
                    board.apply(_shift(mp, r0, c0))
                changed = True
    assert all(board.goal[board.at[cell]] == cell for cell in region), "3x3 base not solved"


def solve_puzzle_constructive(inst: Instance) -> Plan:
    """Always-successful plan for an N x N fully occupied grid, N >= 3."""
    g = inst.graph
    grid = g.grid
    if grid is None or grid.rows != grid.cols or grid.removed or grid.rows < 3:
        raise PuzzleError("instance must be a full N x N grid with N >= 3")
    n = grid.rows
    if inst.n != n * n:
        raise PuzzleError("every vertex must hold a robot")
    board = _Board(n, inst.starts, inst.goals)
    locked: set = set()
    for k in range(n - 3):
        r0 = c0 = k
        free = {(r, c) for r in range(r0, n) for c in range(c0, n)}
        row = [(r0, c) for c in range(c0, n)]
        for cell in row[:-2]:
            board.place([cell], free - locked)
            locked.add(cell)
        board.place(row[-2:], free - locked)
        locked.update(row[-2:])
        col = [(r, c0) for r in range(r0 + 1, n)]
        for cell in col[:-2]:
            board.place([cell], free - locked)
            locked.add(cell)
        board.place(col[-2:], free - locked)
        locked.update(col[-2:])
    _solve_base(board, n - 3, n - 3)
    return Plan.from_configs(board.configs)
