import itertools
import random

import pytest

from mppilp.graph import Graph, make_grid
from mppilp.instances import Instance, generate_instance
from mppilp.oracle import (
    SOLVED,
    UNKNOWN,
    UNSOLVABLE,
    PuzzleError,
    bfs_min_makespan,
    enumerate_cycles,
    enumerate_joint_moves,
    exhaustive_optimal,
    full_occupancy_moves,
    joint_move_count,
    rotation,
    solve_puzzle_constructive,
)
from mppilp.plan import Plan
from mppilp.validate import metrics, validate

FOUR_BY_FOUR_MOVES = 950


def brute_moves(g, config):
    options = [(v,) + g.neighbors(v) for v in config]
    out = set()
    for nxt in itertools.product(*options):
        if len(set(nxt)) < len(nxt):
            continue
        pos = {v: i for i, v in enumerate(config)}
        if any(nxt[i] != v and pos.get(nxt[i]) is not None and nxt[pos[nxt[i]]] == v
               for i, v in enumerate(config)):
            continue
        out.add(nxt)
    return out


@pytest.mark.parametrize("rows,cols,count,cycles", [(2, 2, 2, 1), (3, 3, 26, 13)])
def test_full_grid_counts(rows, cols, count, cycles):
    g = make_grid(rows, cols)
    assert len(full_occupancy_moves(g)) == count
    assert len(enumerate_cycles(g)) == cycles


def test_four_by_four_count_is_frozen():
    assert len(full_occupancy_moves(make_grid(4, 4))) == FOUR_BY_FOUR_MOVES


@pytest.mark.parametrize("rows,cols", [(1, 2), (1, 4), (2, 2), (2, 3)])
def test_joint_moves_complete(rows, cols):
    g = make_grid(rows, cols)
    for n in range(1, g.vertex_count + 1):
        for config in itertools.permutations(range(g.vertex_count), n):
            assert enumerate_joint_moves(g, config) == brute_moves(g, config)


def test_joint_moves_on_triangle(c3):
    full = (0, 1, 2)
    moves = enumerate_joint_moves(c3, full)
    assert moves == {(0, 1, 2), (1, 2, 0), (2, 0, 1)}
    assert joint_move_count(c3, full) == 2  # identity excluded


def test_rotation_is_cycle_shift():
    assert rotation((0, 1, 4, 3), 1) == {0: 1, 1: 4, 4: 3, 3: 0}
    assert rotation((0, 1, 4, 3), -1) == {0: 3, 1: 0, 4: 1, 3: 4}


def test_cycles_are_simple_and_canonical():
    g = make_grid(3, 3)
    for cyc in enumerate_cycles(g):
        assert len(set(cyc)) == len(cyc) >= 3
        assert cyc[0] == min(cyc) and cyc[1] < cyc[-1]
        assert all(g.has_edge(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc)))


def test_bfs_triangle_rotation(c3):
    res = bfs_min_makespan(Instance(c3, (0, 1, 2), (1, 2, 0)))
    assert res.status == SOLVED and res.value == 1


def test_bfs_swap_is_unsolvable(k2):
    res = bfs_min_makespan(Instance(k2, (0, 1), (1, 0)))
    assert res.status == UNSOLVABLE


def test_bfs_node_cap():
    g = make_grid(3, 3)
    inst = generate_instance(g, 9, 3)
    res = bfs_min_makespan(inst, node_cap=50)
    assert res.status == UNKNOWN


def test_bfs_plan_is_valid_and_optimal():
    g = make_grid(2, 3)
    for seed in range(10):
        inst = generate_instance(g, 4, seed)
        res = bfs_min_makespan(inst)
        assert res.status == SOLVED
        assert validate(res.plan, inst) == []
        assert res.plan.horizon == res.value


def _brute_optimum(inst, objective, T):
    """All plans of exactly T steps, enumerated naively."""
    best = None
    frontier = [[tuple(inst.starts)]]
    for _ in range(T):
        frontier = [seq + [nxt] for seq in frontier for nxt in brute_moves(inst.graph, seq[-1])]
    for seq in frontier:
        if seq[-1] != tuple(inst.goals):
            continue
        v = metrics(Plan.from_configs(seq)).value(objective)
        best = v if best is None else min(best, v)
    return best


@pytest.mark.parametrize("objective", ["makespan", "maxdist", "totaltime", "totaldist"])
def test_exhaustive_matches_naive_enumeration(objective):
    rng = random.Random(11)
    g = make_grid(2, 2)
    for _ in range(6):
        verts = rng.sample(range(4), 4)
        inst = Instance(g, tuple(verts[:2]), tuple(verts[2:]))
        res = exhaustive_optimal(inst, objective)
        assert res.status == SOLVED
        assert validate(res.plan, inst) == []
        assert metrics(res.plan).value(objective) == res.value
        assert res.value == _brute_optimum(inst, objective, 5)


def test_exhaustive_trivial_and_unsolvable(k2):
    inst = Instance(k2, (0,), (0,))
    for obj in ("makespan", "maxdist", "totaltime", "totaldist"):
        assert exhaustive_optimal(inst, obj).value == 0
    swap = Instance(k2, (0, 1), (1, 0))
    for obj in ("makespan", "maxdist", "totaltime", "totaldist"):
        assert exhaustive_optimal(swap, obj, T_cap=6).status != SOLVED


def test_exhaustive_rejects_unknown_objective(k2):
    with pytest.raises(ValueError):
        exhaustive_optimal(Instance(k2, (0,), (1,)), "bogus")


def test_totaltime_counts_late_arrival():
    # robot 0 has to step aside and come back, so its arrival is not at t=0
    g = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3)])
    inst = Instance(g, (1, 0), (1, 2))
    res = exhaustive_optimal(inst, "totaltime")
    assert res.value == 2 + 2


@pytest.mark.parametrize("n", [3, 4, 5])
def test_puzzle_solver_small_batch(n):
    g = make_grid(n, n)
    for seed in range(8):
        inst = generate_instance(g, n * n, seed)
        plan = solve_puzzle_constructive(inst)
        assert validate(plan, inst) == []


def test_puzzle_identity():
    g = make_grid(3, 3)
    inst = Instance(g, tuple(range(9)), tuple(range(9)))
    plan = solve_puzzle_constructive(inst)
    assert plan.horizon == 0


def test_puzzle_single_exchange():
    g = make_grid(3, 3)
    goals = list(range(9))
    goals[0], goals[1] = goals[1], goals[0]
    inst = Instance(g, tuple(range(9)), tuple(goals))
    plan = solve_puzzle_constructive(inst)
    assert validate(plan, inst) == []
    assert plan.horizon == 3


@pytest.mark.parametrize("shape,n", [((2, 2), 4), ((3, 4), 12), ((3, 3), 8)])
def test_puzzle_rejects_other_inputs(shape, n):
    g = make_grid(*shape)
    inst = generate_instance(g, n, 0)
    with pytest.raises(PuzzleError):
        solve_puzzle_constructive(inst)
