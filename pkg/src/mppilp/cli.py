"""``mpp`` command line: generate, solve, validate, oracle, bench, render."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .graph import GenerationError, make_grid, remove_obstacles
from .instances import (
    InstanceFormatError,
    generate_instance,
    parse_instance,
    parse_plan,
    serialize_instance,
    serialize_plan,
)
from .oracle import (
    SOLVED,
    PuzzleError,
    bfs_min_makespan,
    exhaustive_optimal,
    solve_puzzle_constructive,
)
from .planner import OBJECTIVES, Options, PlanningError, solve_objective
from .solver import INFEASIBLE, TIMEOUT, ExternalSolverError
from .timex import COMPACT, FULL
from .validate import metrics, render, validate

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_EXTERNAL = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


def _read(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data: bytes):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(data)


def _grid_spec(text):
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise UsageError(f"grid must look like 24x18, got {text!r}") from None


def cmd_generate(a):
    if a.rows < 1 or a.cols < 1:
        raise UsageError("grid dimensions must be positive")
    if not 0 <= a.obstacles < 100:
        raise UsageError("--obstacles is a percentage in [0, 100)")
    g = make_grid(a.rows, a.cols)
    if a.obstacles:
        g = remove_obstacles(g, a.obstacles / 100.0, a.seed)
    if not 1 <= a.robots <= g.vertex_count:
        raise UsageError(f"--robots must be between 1 and {g.vertex_count}")
    inst = generate_instance(g, a.robots, a.seed)
    _write(a.output, serialize_instance(inst))
    return EXIT_OK


def format_report(rep, timings=False) -> str:
    ratio = "" if rep.ratio is None else f"{rep.ratio:.6f}"
    lines = [
        f"objective {rep.objective}",
        f"status {rep.status}",
        f"achieved {'' if rep.value is None else rep.value}",
        f"lower_bound {rep.lower_bound}",
        f"ratio {ratio}",
        f"horizon {'' if rep.horizon is None else rep.horizon}",
        f"split {rep.k}",
        f"encoding {rep.encoding}",
        f"backend {rep.backend}",
        f"nodes {rep.nodes}",
        "stages " + " ".join(rep.statuses),
    ]
    if timings:
        lines.append("stage_times " + " ".join(f"{t:.3f}" for t in rep.stage_times))
        lines.append(f"wall_time {rep.wall_time:.3f}")
    return "\n".join(lines) + "\n"


def _status_exit(status):
    if status == INFEASIBLE:
        return EXIT_INFEASIBLE
    if status in (TIMEOUT, "timeout"):
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_solve(a):
    if a.split < 1:
        raise UsageError("--split must be at least 1")
    if a.split > 1 and a.objective == "totaltime":
        raise UsageError("--split k>1 cannot be combined with --objective totaltime: total time "
                         "does not add up over stages")
    inst = parse_instance(_read(a.input))
    opts = Options(a.encoding, a.backend, a.time_limit, a.gap, a.tmax, None, None, a.jobs)
    try:
        plan, rep = solve_objective(inst, a.objective, opts, a.split)
    except PlanningError as exc:
        if exc.report is not None:
            sys.stdout.write(format_report(exc.report))
        print(f"error: {exc}", file=sys.stderr)
        return _status_exit(exc.status) or EXIT_INFEASIBLE
    text = format_report(rep, a.timings)
    sys.stdout.write(text)
    print(f"wall time {rep.wall_time:.3f}s", file=sys.stderr)
    if a.report:
        _write(a.report, text.encode("utf-8"))
    if plan is None:
        return _status_exit(rep.status) or EXIT_INFEASIBLE
    _write(a.output, serialize_plan(plan.trimmed()))
    return EXIT_OK


def cmd_validate(a):
    inst = parse_instance(_read(a.input))
    plan = parse_plan(_read(a.solution))
    bad = validate(plan, inst)
    for v in bad:
        print(v)
    if bad:
        return EXIT_INPUT
    m = metrics(plan)
    print(f"ok makespan {m.makespan} max_distance {m.max_distance} "
          f"total_time {m.total_time} total_distance {m.total_distance}")
    return EXIT_OK


def cmd_oracle(a):
    inst = parse_instance(_read(a.input))
    if a.method == "bfs":
        res = bfs_min_makespan(inst, a.node_cap)
        print(f"method bfs\nstatus {res.status}\nvalue {'' if res.value is None else res.value}"
              f"\nexplored {res.explored}")
        plan = res.plan
        if res.status != SOLVED:
            return EXIT_INFEASIBLE if res.status == "unsolvable" else EXIT_TIMEOUT
    elif a.method == "exhaustive":
        res = exhaustive_optimal(inst, a.objective, a.tmax or 30)
        print(f"method exhaustive\nobjective {a.objective}\nstatus {res.status}"
              f"\nvalue {'' if res.value is None else res.value}")
        plan = res.plan
        if res.status != SOLVED:
            return EXIT_TIMEOUT
    else:
        try:
            plan = solve_puzzle_constructive(inst)
        except PuzzleError as exc:
            raise UsageError(str(exc)) from None
        print(f"method puzzle\nsteps {plan.horizon}")
    if a.output and plan is not None:
        _write(a.output, serialize_plan(plan))
    return EXIT_OK


def cmd_bench(a):
    from .bench import parse_range, rows_to_csv, run_bench, summary, write_figures

    rows, cols = _grid_spec(a.grid)
    try:
        pcts = parse_range(a.obstacles)
        counts = parse_range(a.robots)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if a.split > 1 and a.objective == "totaltime":
        raise UsageError("--split k>1 cannot be combined with --objective totaltime")
    opts = Options(a.encoding, a.backend, a.time_limit, a.gap, a.tmax)
    os.makedirs(a.out, exist_ok=True)

    def progress(pct, n, batch):
        done = sum(r.ratio is not None for r in batch)
        print(f"obstacles {pct}% robots {n}: {done}/{len(batch)} solved", file=sys.stderr)

    data = run_bench(rows, cols, pcts, counts, a.per_point, a.objective, a.split, opts,
                     a.seed, a.jobs, progress)
    _write(os.path.join(a.out, "bench.csv"), rows_to_csv(data).encode("utf-8"))
    text = summary(data)
    _write(os.path.join(a.out, "summary.txt"), text.encode("utf-8"))
    sys.stdout.write(text)
    if not a.no_figures:
        for p in write_figures(data, a.out, a.objective):
            print(f"figure {p}", file=sys.stderr)
    return EXIT_OK


def cmd_render(a):
    inst = parse_instance(_read(a.input))
    plan = parse_plan(_read(a.solution))
    bad = validate(plan, inst)
    if bad:
        raise UsageError(f"solution is not valid: {bad[0]}")
    frames = render(plan, inst, a.format)
    ext = "txt" if a.format == "ascii" else "svg"
    os.makedirs(a.output, exist_ok=True)
    for t, data in enumerate(frames):
        _write(os.path.join(a.output, f"frame_{t:04d}.{ext}"), data)
    print(f"{len(frames)} frames written to {a.output}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mpp", description="Optimal multi-robot path planning on graphs")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="random grid instance")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--obstacles", type=float, default=0, help="percent of cells removed")
    g.add_argument("--robots", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    def solver_flags(sp):
        sp.add_argument("--objective", choices=OBJECTIVES, default="makespan")
        sp.add_argument("--split", type=int, default=1)
        sp.add_argument("--encoding", choices=(COMPACT, FULL), default=COMPACT)
        sp.add_argument("--backend", choices=("embedded", "external"), default="embedded")
        sp.add_argument("--time-limit", type=float, default=None)
        sp.add_argument("--gap", type=float, default=0.0)
        sp.add_argument("--tmax", type=int, default=None, help="cap on the makespan horizon")
        sp.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--report", help="also write the report to this file")
    s.add_argument("--timings", action="store_true", help="include wall times in the report")
    solver_flags(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a solution file")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("-s", "--solution", required=True)
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("oracle", help="ground-truth solvers")
    o.add_argument("-i", "--input", required=True)
    o.add_argument("--method", choices=("bfs", "exhaustive", "puzzle"), required=True)
    o.add_argument("--objective", choices=OBJECTIVES, default="makespan")
    o.add_argument("--node-cap", type=int, default=20_000_000)
    o.add_argument("--tmax", type=int, default=None)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="seeded benchmark sweep")
    b.add_argument("--grid", default="24x18")
    b.add_argument("--obstacles", default="0", help="percent list, e.g. 0,10,15,20,25")
    b.add_argument("--robots", default="10..100", help="e.g. 10..100 or 10..100:5")
    b.add_argument("--per-point", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench-out")
    b.add_argument("--no-figures", action="store_true")
    solver_flags(b)
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("render", help="draw a solution frame by frame")
    r.add_argument("-i", "--input", required=True)
    r.add_argument("-s", "--solution", required=True)
    r.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    r.add_argument("-o", "--output", required=True)
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return a.func(a)
    except (UsageError, InstanceFormatError, GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ExternalSolverError as exc:
        print(f"external solver: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL


if __name__ == "__main__":
    sys.exit(main())
