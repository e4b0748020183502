import random

import pytest
from hypothesis import strategies as st

from mppilp.graph import Graph, make_grid
from mppilp.instances import Instance
from mppilp.plan import Plan


@pytest.fixture
def k2():
    return make_grid(1, 2)


@pytest.fixture
def c3():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def random_walk_plan(g, n, T, rng, allow_collisions=False, tries=200):
    """Random collision-free synchronous plan built step by step."""
    from mppilp.oracle.moves import enumerate_joint_moves

    starts = rng.sample(range(g.vertex_count), n)
    configs = [tuple(starts)]
    for _ in range(T):
        succ = sorted(enumerate_joint_moves(g, configs[-1]))
        configs.append(rng.choice(succ))
    return Plan.from_configs(configs)


@st.composite
def small_grids(draw, max_vertices=16):
    rows = draw(st.integers(1, 4))
    cols = draw(st.integers(2 if rows == 1 else 1, max(1, max_vertices // rows)))
    return make_grid(rows, min(cols, 4))


@st.composite
def valid_plans(draw, max_vertices=16, max_T=5):
    g = draw(small_grids(max_vertices))
    n = draw(st.integers(1, g.vertex_count))
    T = draw(st.integers(0, max_T))
    seed = draw(st.integers(0, 2 ** 31))
    plan = random_walk_plan(g, n, T, random.Random(seed))
    inst = Instance(g, plan.at(0), plan.at(plan.horizon))
    return g, inst, plan


def collide(plan, g, rng):
    """Inject one meet or head-on collision into a valid plan; returns (plan, kind) or None."""
    paths = [list(p) for p in plan.paths]
    T = plan.horizon
    n = plan.n
    if n < 2 or T < 1:
        return None
    i, j = rng.sample(range(n), 2)
    t = rng.randrange(1, T + 1)
    if rng.random() < 0.5:
        # meet: robot j steps onto robot i's vertex at time t (only if that is a legal move)
        u = paths[j][t - 1]
        target = paths[i][t]
        if target != u and not g.has_edge(u, target):
            return None
        paths[j][t] = target
        for s in range(t + 1, T + 1):
            paths[j][s] = target
            paths[i][s] = target
        return Plan(tuple(tuple(p) for p in paths)), "meet"
    # head-on: make i and j swap along an edge between their positions at t-1
    a, b = paths[i][t - 1], paths[j][t - 1]
    if not g.has_edge(a, b):
        return None
    for s in range(t, T + 1):
        paths[i][s] = b
        paths[j][s] = a
    return Plan(tuple(tuple(p) for p in paths)), "head-on"


def first_violation(plan):
    """Ground-truth class of the earliest collision."""
    T = plan.horizon
    for t in range(T + 1):
        if len(set(plan.at(t))) < plan.n:
            return "meet", t
        if t < T:
            for i in range(plan.n):
                for j in range(i + 1, plan.n):
                    p, q = plan.paths[i], plan.paths[j]
                    if p[t] != p[t + 1] and p[t] == q[t + 1] and p[t + 1] == q[t]:
                        return "head-on", t
    return None, None


def colliding_samples(count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        rows = rng.randint(1, 4)
        cols = rng.randint(2, 4)
        g = make_grid(rows, cols)
        n = rng.randint(2, g.vertex_count)
        plan = random_walk_plan(g, n, rng.randint(1, 5), rng)
        res = collide(plan, g, rng)
        if res is None:
            continue
        bad, _ = res
        if len(set(bad.at(bad.horizon))) < bad.n:
            continue  # goals must stay injective for an instance to exist
        kind, t = first_violation(bad)
        if kind is None:
            continue
        out.append((g, bad, kind))
    return out
