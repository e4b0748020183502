
import pytest
from hypothesis import given, settings

from mppilp.graph import make_grid
from mppilp.instances import Instance
from mppilp.plan import Plan
from mppilp.timex import (
    BLUE,
    COMPACT,
    FULL,
    HOLD,
    LOOPBACK,
    MOVE,
    CollisionError,
    FlowAssignment,
    FlowError,
    build_network,
    check_flow,
    flow_to_paths,
    paths_to_flow,
    reachability_prune,
)

from conftest import colliding_samples, valid_plans


def test_full_network_counts():
    g = make_grid(2, 2)
    inst = Instance(g, (0,), (3,))
    T = 3
    net = build_network(inst, T, FULL)
    V, E = 4, 4
    kinds = net.kind_counts()
    assert kinds[LOOPBACK] == 1
    assert kinds[HOLD] == V * T
    assert kinds[BLUE] == V * T
    assert kinds[MOVE] == 5 * E * T
    # v(0) plus v(t), v(t)' for t >= 1, plus two gadget nodes per edge and step
    assert net.n_nodes == V + 2 * V * T + 2 * E * T


def test_compact_network_counts():
    g = make_grid(2, 2)
    net = build_network(Instance(g, (0,), (3,)), 3, COMPACT)
    kinds = net.kind_counts()
    assert kinds[MOVE] == 2 * 4 * 3 and kinds[HOLD] == 4 * 3 and kinds[BLUE] == 0
    assert net.n_nodes == 4 * 4


def test_loopbacks_take_the_first_ids():
    g = make_grid(1, 3)
    inst = Instance(g, (0, 2), (2, 0))
    for enc in (FULL, COMPACT):
        net = build_network(inst, 2, enc)
        for i in range(2):
            assert net.arc_kind[i] == LOOPBACK
            assert net.arc_tail[i] == net.sinks[i] and net.arc_head[i] == net.sources[i]


def test_bad_arguments():
    inst = Instance(make_grid(1, 2), (0,), (1,))
    with pytest.raises(ValueError):
        build_network(inst, -1)
    with pytest.raises(ValueError):
        build_network(inst, 1, "sparse")


@pytest.mark.parametrize("enc", [FULL, COMPACT])
def test_prune_drops_unreachable_goal(enc):
    inst = Instance(make_grid(1, 4), (0,), (3,))
    net = build_network(inst, 2, enc)
    assert reachability_prune(net, inst) == [[]]
    net = build_network(inst, 3, enc)
    kept = reachability_prune(net, inst)[0]
    assert kept[0] == 0
    # exactly the straight walk survives at T = distance
    moving = [j for j in kept if net.arc_kind[j] == MOVE]
    assert len(moving) == (3 if enc == COMPACT else 9)


@pytest.mark.parametrize("enc", [FULL, COMPACT])
def test_pruned_arcs_keep_every_feasible_path(enc):
    g = make_grid(3, 3)
    inst = Instance(g, (0, 8), (8, 0))
    net = build_network(inst, 5, enc)
    kept = [set(a) for a in reachability_prune(net, inst)]
    plan = Plan(((0, 1, 2, 5, 8, 8), (8, 7, 6, 3, 0, 0)))
    flow = paths_to_flow(plan, net, inst)
    for i in range(2):
        assert flow.arcs[i] <= kept[i]


def test_c3_rotation_embeds_in_both_encodings(c3):
    inst = Instance(c3, (0, 1, 2), (1, 2, 0))
    plan = Plan(((0, 1), (1, 2), (2, 0)))
    for enc in (FULL, COMPACT):
        net = build_network(inst, 1, enc)
        assert flow_to_paths(net, paths_to_flow(plan, net, inst), inst) == plan


@pytest.mark.parametrize("enc", [FULL, COMPACT])
def test_swap_is_head_on(k2, enc):
    inst = Instance(k2, (0, 1), (1, 0))
    with pytest.raises(CollisionError) as err:
        paths_to_flow(Plan(((0, 1), (1, 0))), build_network(inst, 1, enc), inst)
    assert err.value.kind == "head-on"
    assert err.value.step == 0


@pytest.mark.parametrize("enc", [FULL, COMPACT])
def test_two_robots_entering_one_vertex_meet(enc):
    g = make_grid(1, 3)
    inst = Instance(g, (0, 2), (1, 0))
    # both step onto vertex 1 at t=1
    plan = Plan(((0, 1, 1, 1), (2, 1, 0, 0)))
    with pytest.raises(CollisionError) as err:
        paths_to_flow(plan, build_network(inst, 3, enc), inst)
    assert err.value.kind == "meet"
    assert err.value.step == 1


def test_check_flow_catches_capacity_and_conservation(k2):
    inst = Instance(k2, (0,), (1,))
    net = build_network(inst, 1, COMPACT)
    move = net.move_arcs[(0, 1, 0)][0]
    check_flow(net, FlowAssignment(({0, move},)))
    with pytest.raises(FlowError):
        check_flow(net, FlowAssignment(({move},)))
    inst2 = Instance(k2, (0, 1), (1, 0))
    net2 = build_network(inst2, 1, COMPACT)
    with pytest.raises(FlowError):
        check_flow(net2, FlowAssignment(({1, net2.move_arcs[(0, 1, 0)][0]}, set())))


def test_flow_to_paths_rejects_missing_loopback(k2):
    inst = Instance(k2, (0,), (1,))
    net = build_network(inst, 1, COMPACT)
    with pytest.raises(FlowError):
        flow_to_paths(net, FlowAssignment((set(),)), inst)


@settings(max_examples=250, deadline=None)
@given(valid_plans())
def test_plans_round_trip_through_flows(args):
    g, inst, plan = args
    for enc in (FULL, COMPACT):
        net = build_network(inst, plan.horizon, enc)
        flow = paths_to_flow(plan, net, inst)
        check_flow(net, flow)
        assert flow_to_paths(net, flow, inst) == plan


@pytest.mark.parametrize("enc", [FULL, COMPACT])
def test_colliding_plans_are_rejected_with_their_class(enc):
    for g, bad, kind in colliding_samples(120, 5):
        inst = Instance(g, bad.at(0), bad.at(bad.horizon))
        net = build_network(inst, bad.horizon, enc)
        with pytest.raises(CollisionError) as err:
            paths_to_flow(bad, net, inst)
        assert err.value.kind == kind
