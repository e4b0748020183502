"""Objective drivers: lower bounds, horizon selection, T escalation and the k-way split."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .graph import distance_table, shortest_path
from .ilp import (
    build_makespan_model,
    build_maxdist_model,
    build_totaldist_model,
    build_totaltime_model,
)
from .ilp.builders import assignment_to_flow
from .instances import Instance
from .plan import Plan
from .solver import EMBEDDED, FEASIBLE, INFEASIBLE, OPTIMAL, TIMEOUT, solve
from .timex import COMPACT, build_network, flow_to_paths, reachability_prune
from .validate import metrics, validate

log = logging.getLogger(__name__)

OBJECTIVES = ("makespan", "maxdist", "totaltime", "totaldist")
SPLITTABLE = ("makespan", "maxdist", "totaldist")
DEFAULT_TOTALTIME_SPLIT = 4

_BUILDERS = {
    "makespan": build_makespan_model,
    "maxdist": build_maxdist_model,
    "totaltime": build_totaltime_model,
    "totaldist": build_totaldist_model,
}


class PlanningError(RuntimeError):
    def __init__(self, message, status, report=None):
        super().__init__(message)
        self.status = status
        self.report = report


@dataclass(frozen=True)
class Options:
    encoding: str = COMPACT
    backend: str = EMBEDDED
    time_limit: float | None = None
    gap: float = 0.0
    t_cap: int | None = None
    horizon: int | None = None  # override for the non-makespan objectives
    executable: str | None = None
    jobs: int = 1


@dataclass
class SolveReport:
    objective: str
    status: str
    value: int | None
    lower_bound: int
    horizon: int | None
    k: int = 1
    stage_times: list = field(default_factory=list)
    statuses: list = field(default_factory=list)
    nodes: int = 0
    encoding: str = COMPACT
    backend: str = EMBEDDED

    @property
    def ratio(self) -> float | None:
        if self.value is None:
            return None
        if self.lower_bound == 0:
            return 1.0 if self.value == 0 else float("inf")
        return self.value / self.lower_bound

    @property
    def wall_time(self) -> float:
        return sum(self.stage_times)


def _shortest_lengths(inst: Instance) -> list[int]:
    out = []
    for s, g in zip(inst.starts, inst.goals):
        d = distance_table(inst.graph, s)[g]
        if d < 0:
            raise ValueError(f"goal {g} unreachable from {s}")
        out.append(d)
    return out


def makespan_lower_bound(inst: Instance) -> int:
    return max(_shortest_lengths(inst), default=0)


def distance_lower_bound(inst: Instance, kind: str = "sum") -> int:
    d = _shortest_lengths(inst)
    if kind == "sum":
        return sum(d)
    if kind == "max":
        return max(d, default=0)
    raise ValueError(f"kind must be 'sum' or 'max', not {kind!r}")


def _lower_bound(inst: Instance, objective: str) -> int:
    if objective in ("makespan", "maxdist"):
        return distance_lower_bound(inst, "max")
    return distance_lower_bound(inst, "sum")


def _identity(inst):
    return Plan(tuple((s,) for s in inst.starts))


def _remaining(deadline):
    if deadline is None:
        return None
    return max(0.0, deadline - time.perf_counter())


def _solve_at(inst, objective, T, opts, deadline, cutoff=None, branching="auto"):
    """Build, prune and solve one model; returns (status, plan or None, objective, nodes)."""
    net = build_network(inst, T, opts.encoding)
    pruned = reachability_prune(net, inst)
    model = _BUILDERS[objective](net, pruned, inst)
    if model.trivially_infeasible:
        return INFEASIBLE, None, None, 0
    remaining = _remaining(deadline)
    if remaining is not None and remaining <= 0:
        return TIMEOUT, None, None, 0
    if opts.backend == EMBEDDED:
        out = solve(model, EMBEDDED, remaining, opts.gap, cutoff=cutoff, branching=branching)
    else:
        out = solve(model, opts.backend, remaining, opts.gap, executable=opts.executable)
    if not out.has_solution:
        return out.status, None, None, out.nodes
    flow = assignment_to_flow(model, out.values(model), inst.n)
    plan = flow_to_paths(net, flow, inst)
    return out.status, plan, out.objective, out.nodes


def min_makespan(inst: Instance, opts: Options = Options()) -> tuple[Plan | None, SolveReport]:
    """Smallest T whose makespan model routes every robot; the first such T is optimal."""
    t0 = time.perf_counter()
    deadline = None if opts.time_limit is None else t0 + opts.time_limit
    lb = makespan_lower_bound(inst)
    report = SolveReport("makespan", INFEASIBLE, None, lb, None,
                         encoding=opts.encoding, backend=opts.backend)
    if inst.starts == inst.goals:
        report.status, report.value, report.horizon = OPTIMAL, 0, 0
        report.stage_times.append(time.perf_counter() - t0)
        return _identity(inst), report
    t_cap = opts.t_cap if opts.t_cap is not None else inst.graph.vertex_count ** 3
    n = inst.n
    for T in range(max(lb, 1), t_cap + 1):
        status, plan, value, nodes = _solve_at(inst, "makespan", T, opts, deadline, cutoff=n - 1)
        report.nodes += nodes
        report.statuses.append(f"T={T}:{status}")
        report.horizon = T
        if plan is not None and value == n:
            report.status, report.value = OPTIMAL, T
            report.stage_times.append(time.perf_counter() - t0)
            return plan, report
        if status == TIMEOUT or (deadline is not None and time.perf_counter() >= deadline):
            report.status = TIMEOUT
            break
    report.stage_times.append(time.perf_counter() - t0)
    return None, report


def _exact_t_min(inst, opts, report, deadline):
    plan, sub = min_makespan(inst, Options(opts.encoding, opts.backend, _remaining(deadline),
                                           0.0, opts.t_cap, None, opts.executable))
    report.nodes += sub.nodes
    report.statuses.append(f"tmin:{sub.status}")
    if plan is None:
        return None, sub.status, None
    return sub.value, sub.status, plan


def _distance_driver(inst, objective, opts):
    t0 = time.perf_counter()
    deadline = None if opts.time_limit is None else t0 + opts.time_limit
    report = SolveReport(objective, INFEASIBLE, None, _lower_bound(inst, objective), None,
                         encoding=opts.encoding, backend=opts.backend)
    if inst.starts == inst.goals:
        report.status, report.value, report.horizon = OPTIMAL, 0, 0
        report.stage_times.append(time.perf_counter() - t0)
        return _identity(inst), report
    warm = None
    if opts.horizon is not None:
        T = opts.horizon
        log.warning("horizon fixed at T=%d: optimality is relative to that horizon", T)
    else:
        t_min, status, warm = _exact_t_min(inst, opts, report, deadline)
        if t_min is None:
            report.status = status
            report.stage_times.append(time.perf_counter() - t0)
            return None, report
        T = inst.n * t_min
        warm = warm.padded(T)
    report.horizon = T
    warm_value = None if warm is None else metrics(warm).value(objective)
    if warm_value is not None and warm_value == report.lower_bound:
        # the makespan-optimal plan already meets the bound
        report.status, report.value = OPTIMAL, warm_value
        report.statuses.append(f"T={T}:bound-met")
        report.stage_times.append(time.perf_counter() - t0)
        return warm, report
    cutoff = warm_value if opts.backend == EMBEDDED else None
    status, plan, value, nodes = _solve_at(inst, objective, T, opts, deadline, cutoff, "lp")
    report.nodes += nodes
    report.statuses.append(f"T={T}:{status}")
    report.status = status
    if plan is None and warm is not None and status in (INFEASIBLE, TIMEOUT):
        # nothing strictly better than the warm start: it is optimal, or the best known
        plan = warm
        report.status = OPTIMAL if status == INFEASIBLE else FEASIBLE
    if plan is not None:
        report.value = metrics(plan).value(objective)
    report.stage_times.append(time.perf_counter() - t0)
    return plan, report


def min_max_dist(inst: Instance, opts: Options = Options()):
    return _distance_driver(inst, "maxdist", opts)


def min_total_dist(inst: Instance, opts: Options = Options()):
    return _distance_driver(inst, "totaldist", opts)


def min_total_time(inst: Instance, opts: Options = Options(), k: int = DEFAULT_TOTALTIME_SPLIT):
    """Total-time optimum, with the horizon taken from a k-way split makespan.

    After solving at that horizon with value S, any optimum finishes by
    ``S - sum(d) + max(d)`` (every other robot needs at least its distance),
    so the model is solved once more at that horizon when it is larger.
    """
    t0 = time.perf_counter()
    deadline = None if opts.time_limit is None else t0 + opts.time_limit
    dist = _shortest_lengths(inst)
    report = SolveReport("totaltime", INFEASIBLE, None, sum(dist), None,
                         encoding=opts.encoding, backend=opts.backend)
    if inst.starts == inst.goals:
        report.status, report.value, report.horizon = OPTIMAL, 0, 0
        report.stage_times.append(time.perf_counter() - t0)
        return _identity(inst), report
    if opts.horizon is not None:
        horizons = [opts.horizon]
        log.warning("horizon fixed at T=%d: optimality is relative to that horizon", opts.horizon)
    else:
        sub_opts = Options(opts.encoding, opts.backend, _remaining(deadline), 0.0, opts.t_cap,
                           None, opts.executable, opts.jobs)
        split_plan, sub = solve_with_split(inst, k, "makespan", sub_opts)
        report.nodes += sub.nodes
        report.statuses.append(f"split{k}:{sub.status}")
        if split_plan is None:
            report.status = sub.status
            report.stage_times.append(time.perf_counter() - t0)
            return None, report
        horizons = [max(1, sub.value)]
    best_plan = None
    while horizons:
        T = horizons.pop()
        status, plan, value, nodes = _solve_at(inst, "totaltime", T, opts, deadline)
        report.nodes += nodes
        report.statuses.append(f"T={T}:{status}")
        report.horizon = T
        report.status = status
        if plan is None:
            break
        best_plan = plan
        report.value = metrics(plan).total_time
        if opts.horizon is None and status == OPTIMAL:
            t_suff = report.value - sum(dist) + max(dist)
            if t_suff > T:
                horizons.append(t_suff)
    report.stage_times.append(time.perf_counter() - t0)
    return best_plan, report


def _nearest_free(g, v, claimed):
    """Closest unclaimed vertex to v by hop distance; ties go to the smallest index."""
    if v not in claimed:
        return v
    seen = {v}
    layer = [v]
    while layer:
        nxt = []
        for u in layer:
            for w in g.adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        free = sorted(w for w in nxt if w not in claimed)
        if free:
            return free[0]
        layer = nxt
    raise RuntimeError("no unclaimed vertex left")


def k_way_split(inst: Instance, k: int) -> list[Instance]:
    """Cut every robot's shortest path into k pieces and return the k stage instances."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return [inst]
    g = inst.graph
    paths = [shortest_path(g, s, t) for s, t in zip(inst.starts, inst.goals)]
    configs = [tuple(inst.starts)]
    for m in range(1, k):
        claimed: set[int] = set()
        conf = []
        for p in paths:
            want = p[round(m * (len(p) - 1) / k)]
            got = _nearest_free(g, want, claimed)
            claimed.add(got)
            conf.append(got)
        configs.append(tuple(conf))
    configs.append(tuple(inst.goals))
    return [Instance(g, a, b) for a, b in zip(configs, configs[1:])]


_STAGE_DRIVERS = {"makespan": min_makespan, "maxdist": min_max_dist, "totaldist": min_total_dist}


def solve_with_split(inst: Instance, k: int, objective: str, opts: Options = Options()):
    """Solve the k stages independently and glue the plans together.

    The reported value is the objective of the glued plan, a heuristic upper
    bound; the ratio is measured against the unsplit lower bound.
    """
    if objective == "totaltime":
        raise ValueError("total time is not additive over stages; use min_total_time, "
                         "which only uses the split to pick its horizon")
    if objective not in SPLITTABLE:
        raise ValueError(f"unknown objective {objective!r}")
    t0 = time.perf_counter()
    stages = k_way_split(inst, k)
    driver = _STAGE_DRIVERS[objective]
    report = SolveReport(objective, OPTIMAL if k == 1 else FEASIBLE, None,
                         _lower_bound(inst, objective), None, k=k,
                         encoding=opts.encoding, backend=opts.backend)
    deadline = None if opts.time_limit is None else t0 + opts.time_limit

    def run(stage):
        return driver(stage, Options(opts.encoding, opts.backend, _remaining(deadline), opts.gap,
                                     opts.t_cap, opts.horizon, opts.executable))

    if opts.jobs > 1 and len(stages) > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(run, stages))
    else:
        results = [run(s) for s in stages]
    glued = None
    total_h = 0
    for m, (plan, sub) in enumerate(results):
        report.stage_times.append(sub.wall_time)
        report.statuses.append(f"stage{m}:{sub.status}")
        report.nodes += sub.nodes
        if plan is None:
            report.status = sub.status
            raise PlanningError(f"stage {m} of {k} failed: {sub.status}", sub.status, report)
        if k == 1:
            report.status = sub.status
        plan = plan.trimmed()
        total_h += plan.horizon
        glued = plan if glued is None else glued.concat(plan)
    report.horizon = total_h
    # trimmed stage horizons are the stage makespans, so the glued horizon is their sum
    report.value = total_h if objective == "makespan" else metrics(glued).value(objective)
    bad = validate(glued, inst)
    if bad:
        raise PlanningError(f"glued plan is invalid: {bad[0]}", "invalid", report)
    return glued, report


def solve_objective(inst: Instance, objective: str, opts: Options = Options(), k: int = 1):
    """Dispatch used by the command line."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if k > 1:
        return solve_with_split(inst, k, objective, opts)
    if objective == "makespan":
        return min_makespan(inst, opts)
    if objective == "maxdist":
        return min_max_dist(inst, opts)
    if objective == "totaldist":
        return min_total_dist(inst, opts)
    return min_total_time(inst, opts)
