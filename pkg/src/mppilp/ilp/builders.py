"""ILP models for the four MPP objectives over a time-expanded network."""

from __future__ import annotations

from ..instances import Instance
from ..timex import COMPACT, LOOPBACK, MAIN, PRIME, FlowAssignment, TimeExpandedNetwork
from .model import BINARY, EQ, GE, INTEGER, LE, MAXIMIZE, MINIMIZE, Constraint, IlpModel


class ModelContractError(ValueError):
    pass


def _node_label(net: TimeExpandedNetwork, node: int) -> str:
    kind = net.node_kind[node]
    t = net.node_layer[node]
    if kind == MAIN:
        return f"{net.node_vertex[node]}_{t}"
    if kind == PRIME:
        return f"{net.node_vertex[node]}_{t}p"
    return f"g{node}_{t}"


def _flow_core(net: TimeExpandedNetwork, pruned, inst: Instance) -> IlpModel:
    """Variables x_i_j plus the capacity and conservation rows shared by all models."""
    model = IlpModel()
    n = inst.n
    if pruned is None:
        pruned = [range(net.n_arcs)] * n
    if any(len(arcs) == 0 for arcs in pruned):
        model.trivially_infeasible = True
    for i in range(n):
        for j in pruned[i]:
            if j < n and j != i:
                continue  # another robot's loopback: variable never created
            model.var_of_arc[(i, j)] = model.add_var(f"x_{i}_{j}", BINARY)
    users: dict[int, list[int]] = {}
    for (i, j), var in model.var_of_arc.items():
        users.setdefault(j, []).append(var)
    for j in sorted(users):
        model.add_constraint(f"cap_{j}", [(v, 1) for v in users[j]], LE, 1)
    for i in range(n):
        balance: dict[int, dict[int, int]] = {}
        for j in pruned[i]:
            var = model.var_of_arc.get((i, j))
            if var is None:
                continue
            balance.setdefault(net.arc_head[j], {})[var] = 1
            balance.setdefault(net.arc_tail[j], {})[var] = -1
        for node in sorted(balance):
            model.add_constraint(f"cons_{i}_{_node_label(net, node)}", balance[node], EQ, 0)
    _layer_rows(model, net, n)
    for i in range(n):
        t = net.horizon
        for step in range(1, t + 1):
            var = model.var_of_arc.get((i, net.hold_arc[(inst.goals[i], step - 1)]))
            if var is not None:
                model.goal_hold_var[(i, step)] = var
    return model


def _layer_rows(model: IlpModel, net: TimeExpandedNetwork, n: int) -> None:
    """A routed robot enters exactly one main node per layer t >= 1."""
    groups: dict[tuple[int, int], list[int]] = {}
    for (i, j), var in model.var_of_arc.items():
        head = net.arc_head[j]
        if net.arc_kind[j] == LOOPBACK or net.node_kind[head] != MAIN:
            continue
        groups.setdefault((i, net.node_layer[head]), []).append(var)
    for (i, t) in sorted(groups):
        loop = model.var_of_arc.get((i, i))
        terms = {v: 1 for v in groups[(i, t)]}
        if loop is None:
            model.implied.append(Constraint(f"layer_{i}_{t}", terms, LE, 0))
        else:
            terms[loop] = -1
            model.implied.append(Constraint(f"layer_{i}_{t}", terms, EQ, 0))


def _force_flow(model: IlpModel, inst: Instance) -> None:
    for i in range(inst.n):
        var = model.var_of_arc.get((i, i))
        if var is None:
            model.trivially_infeasible = True
            continue
        model.add_constraint(f"flow_{i}", [(var, 1)], EQ, 1)


def _distance_terms(model: IlpModel, net: TimeExpandedNetwork, robot: int):
    return [(var, net.arc_cost[j]) for (i, j), var in model.var_of_arc.items()
            if i == robot and net.arc_kind[j] != LOOPBACK and net.arc_cost[j] != 0]


def build_makespan_model(net: TimeExpandedNetwork, pruned, inst: Instance) -> IlpModel:
    model = _flow_core(net, pruned, inst)
    loops = [model.var_of_arc[(i, i)] for i in range(inst.n) if (i, i) in model.var_of_arc]
    model.set_objective(MAXIMIZE, [(v, 1) for v in loops])
    _finish(model, net, inst)
    return model


def build_maxdist_model(net: TimeExpandedNetwork, pruned, inst: Instance) -> IlpModel:
    model = _flow_core(net, pruned, inst)
    _force_flow(model, inst)
    xmax = model.add_var("xmax", INTEGER, 0, net.horizon)
    model.max_var = xmax
    for i in range(inst.n):
        model.add_constraint(f"dist_{i}", _distance_terms(model, net, i) + [(xmax, -1)], LE, 0)
    model.set_objective(MINIMIZE, [(xmax, 1)])
    _finish(model, net, inst)
    return model


def build_totaltime_model(net: TimeExpandedNetwork, pruned, inst: Instance) -> IlpModel:
    """Minimise ``nT - sum y_i^t`` where ``y_i^t`` says robot i rests at its goal from t-1 on.

    ``x_i^t`` is robot i's hold arc at its goal for the step ``t-1 -> t``;
    a missing (pruned) hold arc is the constant 0.
    """
    model = _flow_core(net, pruned, inst)
    _force_flow(model, inst)
    T, n = net.horizon, inst.n
    for i in range(n):
        for t in range(1, T + 1):
            model.stay_var[(i, t)] = model.add_var(f"y_{i}_{t}", BINARY)
    for i in range(n):
        for t in range(T, 0, -1):
            y = model.stay_var[(i, t)]
            x = model.goal_hold_var.get((i, t))
            if t == T:
                if x is None:
                    model.add_constraint(f"ydef_{i}", [(y, 1)], EQ, 0)
                else:
                    model.add_constraint(f"ydef_{i}", [(y, 1), (x, -1)], EQ, 0)
                continue
            y_next = model.stay_var[(i, t + 1)]
            if x is not None:
                model.add_constraint(f"and1_{i}_{t}", [(y, 1), (y_next, -1), (x, -1)], GE, -1)
            model.add_constraint(f"and2_{i}_{t}", [(y, 1), (y_next, -1)], LE, 0)
            if x is None:
                model.add_constraint(f"and3_{i}_{t}", [(y, 1)], LE, 0)
            else:
                model.add_constraint(f"and3_{i}_{t}", [(y, 1), (x, -1)], LE, 0)
    model.set_objective(MINIMIZE, [(v, -1) for v in model.stay_var.values()], n * T)
    _finish(model, net, inst)
    return model


def build_totaldist_model(net: TimeExpandedNetwork, pruned, inst: Instance) -> IlpModel:
    model = _flow_core(net, pruned, inst)
    _force_flow(model, inst)
    terms = []
    for i in range(inst.n):
        terms += _distance_terms(model, net, i)
    model.set_objective(MINIMIZE, terms)
    _finish(model, net, inst)
    return model


def _finish(model: IlpModel, net: TimeExpandedNetwork, inst: Instance) -> None:
    if net.encoding == COMPACT:
        add_compact_collision_constraints(model, net, inst)


def add_compact_collision_constraints(model: IlpModel, net: TimeExpandedNetwork,
                                      inst: Instance) -> IlpModel:
    """Head-on rows per edge and step, meet rows per node with outgoing moves."""
    if net.encoding != COMPACT:
        raise ModelContractError("compact collision rows only apply to the compact encoding")
    if model.compact_rows:
        return model
    by_arc: dict[int, list[int]] = {}
    for (i, j), var in model.var_of_arc.items():
        by_arc.setdefault(j, []).append(var)
    edges = sorted(net.edge_index, key=net.edge_index.get)
    for t in range(net.horizon):
        for k, (u, v) in enumerate(edges):
            vars_ = by_arc.get(net.move_arcs[(u, v, t)][0], []) + \
                by_arc.get(net.move_arcs[(v, u, t)][0], [])
            if vars_:
                model.add_constraint(f"ho_{k}_{t}", [(x, 1) for x in vars_], LE, 1)
    outs = net.out_arcs()
    for t in range(net.horizon):
        for v in range(net.n_vertices):
            node = net.main_node[(v, t)]
            vars_ = [x for j in outs[node] if j >= inst.n for x in by_arc.get(j, [])]
            if vars_:
                model.add_constraint(f"meet_{v}_{t}", [(x, 1) for x in vars_], LE, 1)
    model.compact_rows = True
    return model


def assignment_to_flow(model: IlpModel, values, n: int) -> FlowAssignment:
    arcs = [set() for _ in range(n)]
    for (i, j), var in model.var_of_arc.items():
        if values[var]:
            arcs[i].add(j)
    return FlowAssignment(tuple(arcs))


def flow_to_assignment(model: IlpModel, flow: FlowAssignment) -> list[int]:
    """0/1 values for the x variables from a flow; y and xmax are derived afterwards."""
    values = [0] * model.n_vars
    for i, arcs in enumerate(flow.arcs):
        for j in arcs:
            var = model.var_of_arc.get((i, j))
            if var is None:
                raise KeyError(f"robot {i} uses arc {j}, which has no variable (pruned)")
            values[var] = 1
    T = max((t for _, t in model.stay_var), default=0)
    for (i, t) in sorted(model.stay_var, key=lambda k: (k[0], -k[1])):
        x = model.goal_hold_var.get((i, t))
        xv = values[x] if x is not None else 0
        values[model.stay_var[(i, t)]] = xv if t == T else min(xv, values[model.stay_var[(i, t + 1)]])
    if model.max_var is not None:
        model_dist = {}
        for c in model.constraints:
            if c.name.startswith("dist_"):
                model_dist[c.name] = sum(a * values[v] for v, a in c.terms.items() if v != model.max_var)
        values[model.max_var] = max(model_dist.values(), default=0)
    return values

