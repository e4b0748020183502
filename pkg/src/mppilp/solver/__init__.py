from __future__ import annotations

from ..ilp.model import IlpModel
from .bnb import (
    FEASIBLE,
    INFEASIBLE,
    OPTIMAL,
    TIMEOUT,
    Limits,
    SolveOutcome,
    embedded_branch_and_bound,
)
from .external import ENV_VAR, ExternalSolverError, IntegrityError, external_solve

EMBEDDED = "embedded"
EXTERNAL = "external"


def solve(model: IlpModel, backend: str = EMBEDDED, time_limit: float | None = None,
          gap: float = 0.0, *, cutoff: int | None = None, executable: str | None = None,
          lp_bound: str = "auto", branching: str = "auto",
          progress=None) -> SolveOutcome:
    """Solve ``model`` with the embedded search or an external executable.

    ``cutoff`` asks the embedded search for solutions strictly better than the
    given objective value; without one, ``infeasible`` means the model has no
    solution at all.
    """
    if backend == EMBEDDED:
        return embedded_branch_and_bound(
            model, Limits(time_limit=time_limit, gap=gap, cutoff=cutoff,
                          lp_bound=lp_bound, branching=branching,
                          progress=progress))
    if backend == EXTERNAL:
        return external_solve(model, executable, time_limit)
    raise ValueError(f"unknown backend {backend!r}")


__all__ = [
    "EMBEDDED", "EXTERNAL", "ENV_VAR", "FEASIBLE", "INFEASIBLE", "OPTIMAL", "TIMEOUT",
    "ExternalSolverError", "IntegrityError", "Limits", "SolveOutcome",
    "embedded_branch_and_bound", "external_solve", "solve",
]
