"""Seeded benchmark sweeps: CSV rows, a text summary and matplotlib figures."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .graph import GenerationError, make_grid, remove_obstacles
from .instances import generate_instance
from .planner import Options, PlanningError, solve_objective
from .solver import TIMEOUT

COLUMNS = ["obstacle_pct", "robots", "index", "seed", "status", "value", "lower_bound",
           "ratio", "horizon", "nodes", "wall_time"]


@dataclass
class BenchRow:
    obstacle_pct: int
    robots: int
    index: int
    seed: int
    status: str
    value: int | None
    lower_bound: int | None
    ratio: float | None
    horizon: int | None
    nodes: int
    wall_time: float


def parse_range(text: str) -> list[int]:
    """``10..100`` (step 10), ``2..8:2`` or a comma list."""
    if ".." in text:
        lo, rest = text.split("..", 1)
        hi, _, step = rest.partition(":")
        lo, hi = int(lo), int(hi)
        step = int(step) if step else (10 if hi - lo >= 10 else 1)
        if step <= 0:
            raise ValueError("range step must be positive")
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",") if x.strip()]


def instance_seed(base: int, pct: int, robots: int, index: int) -> int:
    # fixed mixing so every cell of the sweep gets its own reproducible seed
    return (base * 1_000_003 + pct * 10_007 + robots * 101 + index) % (2 ** 32)


def _one(args):
    rows, cols, pct, n, index, seed, objective, k, opts = args
    t0 = time.perf_counter()
    g = make_grid(rows, cols)
    try:
        if pct:
            g = remove_obstacles(g, pct / 100.0, seed)
        if n > g.vertex_count:
            raise GenerationError("more robots than free cells")
        inst = generate_instance(g, n, seed)
    except GenerationError:
        return BenchRow(pct, n, index, seed, "generation-failed", None, None, None, None, 0, 0.0)
    try:
        plan, rep = solve_objective(inst, objective, opts, k)
    except PlanningError as exc:
        rep = exc.report
        return BenchRow(pct, n, index, seed, exc.status, None, rep.lower_bound if rep else None,
                        None, None, rep.nodes if rep else 0, time.perf_counter() - t0)
    ratio = None if rep.ratio is None else round(rep.ratio, 4)
    return BenchRow(pct, n, index, seed, rep.status, rep.value, rep.lower_bound, ratio,
                    rep.horizon, rep.nodes, round(time.perf_counter() - t0, 3))


def run_bench(rows, cols, obstacle_pcts, robot_counts, per_point, objective="makespan", k=1,
              opts: Options = Options(), seed=0, jobs=1, progress=None) -> list[BenchRow]:
    """Sweep robot counts per obstacle level; a series stops at its first timed-out point."""
    out: list[BenchRow] = []
    for pct in obstacle_pcts:
        for n in robot_counts:
            tasks = [(rows, cols, pct, n, i, instance_seed(seed, pct, n, i), objective, k, opts)
                     for i in range(per_point)]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    batch = list(pool.map(_one, tasks))
            else:
                batch = [_one(t) for t in tasks]
            out.extend(batch)
            if progress is not None:
                progress(pct, n, batch)
            if any(r.status in (TIMEOUT, "timeout") for r in batch):
                break
    return out


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def _points(rows):
    pts = {}
    for r in rows:
        pts.setdefault((r.obstacle_pct, r.robots), []).append(r)
    return pts


def summary(rows: list[BenchRow]) -> str:
    lines = [f"{'obst%':>6} {'robots':>6} {'solved':>7} {'mean_time':>10} {'mean_ratio':>10}"]
    for (pct, n), batch in sorted(_points(rows).items()):
        ok = [r for r in batch if r.ratio is not None]
        mt = sum(r.wall_time for r in batch) / len(batch)
        mr = sum(r.ratio for r in ok) / len(ok) if ok else float("nan")
        lines.append(f"{pct:>6} {n:>6} {len(ok):>3}/{len(batch):<3} {mt:>10.3f} {mr:>10.3f}")
    return "\n".join(lines) + "\n"


def write_figures(rows: list[BenchRow], outdir: str, objective: str) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = _points(rows)
    by_pct: dict[int, list] = {}
    for (pct, n), batch in sorted(pts.items()):
        ok = [r for r in batch if r.ratio is not None]
        if not ok:
            continue
        by_pct.setdefault(pct, []).append(
            (n, sum(r.wall_time for r in ok) / len(ok), sum(r.ratio for r in ok) / len(ok)))
    written = []
    for key, idx, ylabel, fname in (("time", 1, "mean wall time (s)", "time.png"),
                                    ("ratio", 2, f"mean {objective} ratio", "ratio.png")):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        for pct, series in sorted(by_pct.items()):
            ax.plot([s[0] for s in series], [s[idx] for s in series], marker="o", ms=3,
                    label=f"{pct}% obstacles")
        ax.set_xlabel("robots")
        ax.set_ylabel(ylabel)
        if key == "time":
            ax.set_yscale("log")
        if by_pct:
            ax.legend(fontsize=7, frameon=False)
        fig.tight_layout()
        path = os.path.join(outdir, fname)
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
