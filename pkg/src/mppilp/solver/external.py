"""Bridge to an external ILP executable through LP and solution files.

Invocation contract: ``<exe> <lp-file> <solution-file> <time-limit-seconds>``.
The solution file starts with ``status <optimal|feasible|infeasible>`` and
``objective <value>``, followed by ``<name> <value>`` lines; variables that
are not listed are taken as 0.  The returned assignment is always re-checked
against the model.
"""

from __future__ import annotations

import os
import subprocess
import tempfile
import time

from ..ilp.model import IlpModel, export_lp
from .bnb import FEASIBLE, INFEASIBLE, OPTIMAL, SolveOutcome

ENV_VAR = "MPP_ILP_SOLVER"


class ExternalSolverError(RuntimeError):
    pass


class IntegrityError(ExternalSolverError):
    """The external tool returned an assignment that breaks the model."""


def _parse_solution(text: str, model: IlpModel):
    status = objective = None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ExternalSolverError(f"solution line {lineno}: expected two fields, got {line!r}")
        key, val = parts
        if key == "status":
            if val not in (OPTIMAL, FEASIBLE, INFEASIBLE):
                raise ExternalSolverError(f"unknown status {val!r}")
            status = val
            continue
        try:
            num = float(val)
        except ValueError:
            raise ExternalSolverError(f"solution line {lineno}: bad number {val!r}") from None
        if key == "objective":
            objective = num
        else:
            if key not in model._index:
                raise ExternalSolverError(f"solution names unknown variable {key!r}")
            if abs(num - round(num)) > 1e-6:
                raise IntegrityError(f"variable {key} has fractional value {num}")
            values[key] = int(round(num))
    if status is None:
        raise ExternalSolverError("solution file has no status line")
    return status, objective, values


def external_solve(model: IlpModel, executable: str | None = None,
                   time_limit: float | None = None) -> SolveOutcome:
    exe = executable or os.environ.get(ENV_VAR)
    if not exe:
        raise ExternalSolverError(f"no external solver configured (set {ENV_VAR})")
    if not os.path.exists(exe):
        raise ExternalSolverError(f"external solver {exe!r} not found")
    limit = 0 if time_limit is None else time_limit
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="mpp-ilp-") as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "model.sol")
        with open(lp_path, "wb") as fh:
            fh.write(export_lp(model))
        try:
            proc = subprocess.run([exe, lp_path, sol_path, str(limit)], capture_output=True,
                                  timeout=None if not time_limit else time_limit + 30)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExternalSolverError(f"external solver failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalSolverError(
                f"external solver exited with status {proc.returncode}: "
                f"{proc.stderr.decode(errors='replace').strip()[:200]}")
        if not os.path.exists(sol_path):
            raise ExternalSolverError("external solver wrote no solution file")
        with open(sol_path) as fh:
            status, objective, values = _parse_solution(fh.read(), model)
    wall = time.perf_counter() - t0
    if status == INFEASIBLE:
        return SolveOutcome(INFEASIBLE, {}, None, None, wall, 0, backend="external")
    assignment = {name: values.get(name, 0) for name in model.names}
    ordered = [assignment[name] for name in model.names]
    bad = model.violations(ordered)
    if bad:
        raise IntegrityError(f"external assignment violates {len(bad)} rows, e.g. {bad[:3]}")
    value = model.evaluate(ordered)
    if objective is not None and abs(objective - value) > 1e-6:
        raise IntegrityError(f"reported objective {objective} but the assignment gives {value}")
    bound = value if status == OPTIMAL else None
    return SolveOutcome(status, assignment, value, bound, wall, 0, backend="external")
