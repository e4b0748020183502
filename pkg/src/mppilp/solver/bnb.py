"""Exact depth-first branch and bound for small integer programs.

The search keeps integer bounds for every variable and propagates each row
(activity-based bound tightening) after every decision.  A node is a leaf
when every row is satisfied by putting all free variables at their lower
bound; otherwise the search branches on a variable of the most constrained
row that the lower-bound completion violates.  The objective is handled as
an extra row whose right-hand side is lowered each time an incumbent is
found, so the greedy bound (best case of every free variable) prunes through
ordinary propagation.  An optional LP relaxation, solved with HiGHS, adds a
stronger bound and early infeasibility detection at every node.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..ilp.model import EQ, GE, INTEGER, MAXIMIZE, IlpModel

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout-no-incumbent"

# below this size plain propagation is cheaper than solving relaxations
LP_AUTO_MIN_VARS = 64


@dataclass
class Limits:
    time_limit: float | None = None
    gap: float = 0.0
    node_limit: int | None = None
    # only accept solutions strictly better than this objective value
    cutoff: int | None = None
    lp_bound: str = "auto"  # "auto", "always", "never"
    # "rows": follow violated rows (good for proving infeasibility under a cutoff),
    # "lp": follow the relaxation, "auto": rows when a cutoff is given, else lp
    branching: str = "auto"
    progress: object = None  # callable(objective, bound, nodes)


@dataclass
class SolveOutcome:
    status: str
    assignment: dict = field(default_factory=dict)
    objective: int | None = None
    bound: int | float | None = None
    wall_time: float = 0.0
    nodes: int = 0
    backend: str = "embedded"

    @property
    def has_solution(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE)

    def values(self, model: IlpModel) -> list[int]:
        return [self.assignment[name] for name in model.names]


class _Engine:
    def __init__(self, model: IlpModel, limits: Limits):
        self.model = model
        self.limits = limits
        self.sign = -1 if model.sense == MAXIMIZE else 1  # internal problem is a minimisation
        nv = model.n_vars
        self.lb = list(model.lower)
        self.ub = list(model.upper)
        self.is_int = [k == INTEGER for k in model.kinds]
        # rows: sum a x <= rhs (le) or == rhs (eq)
        self.rvars: list[list[int]] = []
        self.rcoef: list[list[int]] = []
        self.rhs: list[int] = []
        self.req: list[bool] = []
        self.rspan: list[int] = []
        for con in list(model.constraints) + list(model.implied):
            terms = sorted(con.terms.items())
            if con.sense == GE:
                self._add_row([v for v, _ in terms], [-a for _, a in terms], -con.rhs, False)
            else:
                self._add_row([v for v, _ in terms], [a for _, a in terms], con.rhs, con.sense == EQ)
        self._presolve_rows()
        obj_terms = sorted((v, self.sign * a) for v, a in model.objective.items())
        self.obj_vars = [v for v, _ in obj_terms]
        self.obj_coef = [a for _, a in obj_terms]
        self.obj_const = self.sign * model.objective_constant
        # objective row: sum c x <= cutoff - const (updated as incumbents appear)
        self.obj_row = len(self.rhs)
        self._add_row(self.obj_vars, self.obj_coef, 10 ** 15, False)
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(nv)]
        for r, (vs, cs) in enumerate(zip(self.rvars, self.rcoef)):
            for v, a in zip(vs, cs):
                self.occ[v].append((r, a))
        nr = len(self.rhs)
        self.minact = [0] * nr
        self.maxact = [0] * nr
        self.lbact = [0] * nr
        self.nfree = [0] * nr
        for r in range(nr):
            self._recompute(r)
        self.trail: list[tuple[int, int, int]] = []
        self.queue: list[int] = list(range(nr))
        self.queued = [True] * nr
        self.nodes = 0
        self.best_obj: int | None = None
        self.best_values: list[int] | None = None
        self.root_bound: float | None = None
        self.start = time.perf_counter()
        self.reason = "exhausted"
        self._lp = None
        self._lp_x = None  # primal solution of the last node relaxation
        self.lp_branching = limits.branching == "lp" or (
            limits.branching == "auto" and limits.cutoff is None)
        self.use_lp = limits.lp_bound == "always" or (
            limits.lp_bound == "auto" and nv >= LP_AUTO_MIN_VARS)

    # rows -------------------------------------------------------------
    def _add_row(self, vs, cs, rhs, eq):
        self.rvars.append(list(vs))
        self.rcoef.append(list(cs))
        self.rhs.append(rhs)
        self.req.append(eq)
        self.rspan.append(max((abs(a) * (self.ub[v] - self.lb[v]) for v, a in zip(vs, cs)), default=0))

    def _presolve_rows(self):
        """Drop rows that can never bind and set-packing rows dominated by larger ones."""
        keep = []
        packing = {}
        for r in range(len(self.rhs)):
            vs, cs = self.rvars[r], self.rcoef[r]
            maxact = sum(a * (self.ub[v] if a > 0 else self.lb[v]) for v, a in zip(vs, cs))
            if not self.req[r] and maxact <= self.rhs[r]:
                continue
            if not self.req[r] and self.rhs[r] == 1 and all(a == 1 for a in cs) \
                    and all(self.lb[v] == 0 and self.ub[v] == 1 for v in vs):
                packing[r] = frozenset(vs)
            keep.append(r)
        by_var: dict[int, list[int]] = {}
        for r, s in packing.items():
            for v in s:
                by_var.setdefault(v, []).append(r)
        dominated = set()
        for r, s in packing.items():
            v0 = min(s, key=lambda v: len(by_var[v]))
            for q in by_var[v0]:
                if q != r and q not in dominated and s <= packing[q] and (len(s) < len(packing[q]) or q < r):
                    dominated.add(r)
                    break
        keep = [r for r in keep if r not in dominated]
        self.rvars = [self.rvars[r] for r in keep]
        self.rcoef = [self.rcoef[r] for r in keep]
        self.rhs = [self.rhs[r] for r in keep]
        self.req = [self.req[r] for r in keep]
        self.rspan = [self.rspan[r] for r in keep]

    def _recompute(self, r):
        lb, ub = self.lb, self.ub
        mn = mx = la = nf = 0
        for v, a in zip(self.rvars[r], self.rcoef[r]):
            if a > 0:
                mn += a * lb[v]
                mx += a * ub[v]
            else:
                mn += a * ub[v]
                mx += a * lb[v]
            la += a * lb[v]
            if lb[v] != ub[v]:
                nf += 1
        self.minact[r], self.maxact[r], self.lbact[r], self.nfree[r] = mn, mx, la, nf

    # bound changes ----------------------------------------------------
    def _set(self, v, new_lb, new_ub):
        old_lb, old_ub = self.lb[v], self.ub[v]
        self.trail.append((v, old_lb, old_ub))
        self.lb[v], self.ub[v] = new_lb, new_ub
        dlb, dub = new_lb - old_lb, new_ub - old_ub
        was_free = old_lb != old_ub
        now_free = new_lb != new_ub
        minact, maxact, lbact, nfree = self.minact, self.maxact, self.lbact, self.nfree
        queued, queue = self.queued, self.queue
        for r, a in self.occ[v]:
            if a > 0:
                minact[r] += a * dlb
                maxact[r] += a * dub
            else:
                minact[r] += a * dub
                maxact[r] += a * dlb
            lbact[r] += a * dlb
            if was_free and not now_free:
                nfree[r] -= 1
            if not queued[r]:
                queued[r] = True
                queue.append(r)

    def _undo(self, mark):
        trail = self.trail
        lb, ub = self.lb, self.ub
        minact, maxact, lbact, nfree = self.minact, self.maxact, self.lbact, self.nfree
        while len(trail) > mark:
            v, old_lb, old_ub = trail.pop()
            dlb, dub = old_lb - lb[v], old_ub - ub[v]
            became_free = lb[v] == ub[v] and old_lb != old_ub
            lb[v], ub[v] = old_lb, old_ub
            for r, a in self.occ[v]:
                if a > 0:
                    minact[r] += a * dlb
                    maxact[r] += a * dub
                else:
                    minact[r] += a * dub
                    maxact[r] += a * dlb
                lbact[r] += a * dlb
                if became_free:
                    nfree[r] += 1

    def _propagate(self) -> bool:
        queue, queued = self.queue, self.queued
        lb, ub = self.lb, self.ub
        rvars, rcoef, rhs, req, rspan = self.rvars, self.rcoef, self.rhs, self.req, self.rspan
        minact, maxact = self.minact, self.maxact
        ok = True
        while queue:
            r = queue.pop()
            queued[r] = False
            if not ok:
                continue
            b = rhs[r]
            slack = b - minact[r]
            if slack < 0:
                ok = False
                continue
            if req[r]:
                slack2 = maxact[r] - b
                if slack2 < 0:
                    ok = False
                    continue
            else:
                slack2 = None
            if slack >= rspan[r] and (slack2 is None or slack2 >= rspan[r]):
                continue
            for v, a in zip(rvars[r], rcoef[r]):
                lo, hi = lb[v], ub[v]
                if lo == hi:
                    continue
                # re-read the slack: earlier tightenings in this loop moved the activities
                slack = b - minact[r]
                if a > 0:
                    if a * (hi - lo) > slack:
                        hi = lo + slack // a
                else:
                    if -a * (hi - lo) > slack:
                        lo = hi - slack // (-a)
                if slack2 is not None:
                    slack2 = maxact[r] - b
                    if a > 0:
                        if a * (hi - lo) > slack2:
                            lo = max(lo, hi - slack2 // a)
                    else:
                        if -a * (hi - lo) > slack2:
                            hi = min(hi, lo + slack2 // (-a))
                if lo > hi:
                    ok = False
                    break
                if lo != lb[v] or hi != ub[v]:
                    self._set(v, lo, hi)
        if not ok:
            for r in queue:
                queued[r] = False
            queue.clear()
        return ok

    # LP bound ---------------------------------------------------------
    def _lp_setup(self):
        import highspy
        from scipy.sparse import csc_matrix

        rows = [r for r in range(len(self.rhs)) if r != self.obj_row]
        data, ri, ci = [], [], []
        for k, r in enumerate(rows):
            for v, a in zip(self.rvars[r], self.rcoef[r]):
                data.append(float(a))
                ri.append(k)
                ci.append(v)
        nv = len(self.lb)
        mat = csc_matrix((data, (ri, ci)), shape=(len(rows), nv))
        lp = highspy.HighsLp()
        lp.num_col_ = nv
        lp.num_row_ = len(rows)
        cost = np.zeros(nv)
        for v, a in zip(self.obj_vars, self.obj_coef):
            cost[v] = a
        lp.col_cost_ = cost
        lp.col_lower_ = np.array(self.lb, dtype=float)
        lp.col_upper_ = np.array(self.ub, dtype=float)
        inf = highspy.kHighsInf
        lp.row_lower_ = np.array([self.rhs[r] if self.req[r] else -inf for r in rows], dtype=float)
        lp.row_upper_ = np.array([self.rhs[r] for r in rows], dtype=float)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = mat.indptr
        lp.a_matrix_.index_ = mat.indices
        lp.a_matrix_.value_ = mat.data
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("threads", 1)
        h.setOptionValue("presolve", "off")  # keep the basis warm between nodes
        h.passModel(lp)
        self._lp = (h, np.arange(nv, dtype=np.int32), highspy.HighsModelStatus)

    def _lp_bound(self):
        """LP relaxation value of the current node (None if the LP is infeasible)."""
        if self._lp is None:
            self._lp_setup()
        h, idx, st = self._lp
        h.changeColsBounds(len(idx), idx, np.array(self.lb, dtype=float),
                           np.array(self.ub, dtype=float))
        h.run()
        status = h.getModelStatus()
        self._lp_x = None
        if status == st.kInfeasible:
            return None
        if status != st.kOptimal:
            return -float("inf")
        self._lp_x = np.asarray(h.getSolution().col_value)
        return h.getInfo().objective_function_value

    # search -----------------------------------------------------------
    def _lp_branch(self):
        """(var, value) to branch on from the relaxation; (None, values) if it is integral.

        Takes the fractional variable created last: auxiliary integers such as a
        maximum come last in the builders, and late arcs pin down whole paths.
        """
        x = self._lp_x
        frac = np.flatnonzero(np.abs(x - np.round(x)) > 1e-6)
        if not len(frac):
            return None, [int(round(float(a))) for a in x]
        v = int(frac[-1])
        return v, float(x[v])

    def _choose(self):
        """A free variable of the most constrained row violated by the lower-bound completion."""
        best_r, best_n = -1, None
        lbact, rhs, req, nfree = self.lbact, self.rhs, self.req, self.nfree
        for r in range(len(rhs)):
            la = lbact[r]
            if la > rhs[r] or (req[r] and la != rhs[r]):
                nf = nfree[r]
                if best_n is None or nf < best_n:
                    best_r, best_n = r, nf
                    if nf <= 1:
                        break
        if best_r < 0:
            return None
        r = best_r
        need_up = lbact[r] < rhs[r]  # only possible for equality rows
        for v, a in zip(self.rvars[r], self.rcoef[r]):
            if self.lb[v] != self.ub[v] and ((a > 0) == need_up):
                return v
        return None

    def _record_leaf(self, values=None):
        values = list(self.lb) if values is None else values
        obj = self.obj_const + sum(a * values[v] for v, a in zip(self.obj_vars, self.obj_coef))
        if self.best_obj is None or obj < self.best_obj:
            self.best_obj = obj
            self.best_values = values
            if self.limits.progress is not None:
                self.limits.progress(self.sign * obj, self._external_bound(), self.nodes)
        self._tighten_cutoff(self.best_obj)

    def _tighten_cutoff(self, value):
        new = value - 1 - self.obj_const
        if new < self.rhs[self.obj_row]:
            self.rhs[self.obj_row] = new
            if not self.queued[self.obj_row]:
                self.queued[self.obj_row] = True
                self.queue.append(self.obj_row)

    def _external_bound(self):
        if self.root_bound is None:
            return None
        return self.sign * self.root_bound

    def _gap_closed(self) -> bool:
        if self.best_obj is None or self.root_bound is None:
            return False
        inc, bnd = self.best_obj, self.root_bound
        if inc <= bnd:
            return True
        return (inc - bnd) / max(1, abs(inc)) <= self.limits.gap

    def _out_of_budget(self) -> bool:
        lim = self.limits
        if lim.node_limit is not None and self.nodes >= lim.node_limit:
            return True
        if lim.time_limit is not None and (self.nodes & 63) == 0 and \
                time.perf_counter() - self.start > lim.time_limit:
            return True
        return False

    def _node_ok(self, depth) -> bool:
        """Propagate and, where enabled, check the LP bound of the current node."""
        if not self._propagate():
            return False
        if self.use_lp:
            val = self._lp_bound()
            if val is None:
                return False
            bound = int(np.ceil(val + self.obj_const - 1e-6)) if np.isfinite(val) else None
            if depth == 0 and bound is not None:
                self.root_bound = max(self.root_bound, bound) if self.root_bound is not None else bound
            # the objective row holds the incumbent or cutoff as "value <= rhs + const"
            if bound is not None and bound > self.rhs[self.obj_row] + self.obj_const:
                return False
        return True

    def run(self) -> None:
        lim = self.limits
        if lim.cutoff is not None:
            self._tighten_cutoff(self.sign * lim.cutoff)
        self.root_bound = self.obj_const + self.minact[self.obj_row]
        if not self._node_ok(0):
            return
        self.root_bound = max(self.root_bound, self.obj_const + self.minact[self.obj_row])
        stack: list[tuple[int, int, int, int, int]] = []  # (mark, var, alt_lb, alt_ub, depth)
        depth = 0
        while True:
            self.nodes += 1
            if self._out_of_budget():
                self.reason = "budget"
                return
            descend = fathomed = False
            lp_val = None
            if self._lp_x is not None:
                v, lp_val = self._lp_branch()
                if v is None:
                    if self.model.violations(lp_val):
                        # rounding trouble: fall back to row-driven branching
                        v, lp_val = self._choose(), None
                    else:
                        # integral relaxation optimum: nothing better below this node
                        self._record_leaf(lp_val)
                        if self._gap_closed():
                            self.reason = "gap"
                            return
                        fathomed = True
                elif not self.lp_branching:
                    v, lp_val = self._choose(), None
            else:
                v = self._choose()
            if fathomed:
                pass
            elif v is None:
                self._record_leaf()
                if self._gap_closed():
                    self.reason = "gap"
                    return
                # the tightened objective row may still admit better completions here
                if self._node_ok(depth):
                    descend = True
            else:
                lo, hi = self.lb[v], self.ub[v]
                up_first = self.sign < 0 if lp_val is None else lp_val - np.floor(lp_val) >= 0.5
                if lp_val is not None and self.is_int[v] and hi - lo > 1:
                    f = int(np.floor(lp_val))
                    first, alt = ((lo, f), (f + 1, hi)) if not up_first else ((f + 1, hi), (lo, f))
                elif up_first:
                    first, alt = (hi, hi), (lo, hi - 1)
                else:
                    first, alt = (lo, lo), (lo + 1, hi)
                if lp_val is None and self.is_int[v] and hi - lo > 1:
                    # integer split: down half first when minimising
                    first, alt = ((lo, lo), (lo + 1, hi)) if not up_first else ((hi, hi), (lo, hi - 1))
                mark = len(self.trail)
                stack.append((mark, v, alt[0], alt[1], depth + 1))
                self._set(v, first[0], first[1])
                depth += 1
                if self._node_ok(depth):
                    descend = True
            if descend:
                continue
            # backtrack to the most recent untried alternative
            while stack:
                mark, var, alo, ahi, d = stack.pop()
                self._undo(mark)
                self.queue.append(self.obj_row)
                self.queued[self.obj_row] = True
                if var < 0:
                    continue
                stack.append((mark, -1, 0, 0, d))
                self._set(var, alo, ahi)
                depth = d
                if self._node_ok(depth):
                    break
            else:
                return


def embedded_branch_and_bound(model: IlpModel, limits: Limits | None = None) -> SolveOutcome:
    limits = limits or Limits()
    t0 = time.perf_counter()
    eng = _Engine(model, limits)
    eng.run()
    wall = time.perf_counter() - t0
    sign = eng.sign
    bound = None if eng.root_bound is None else sign * eng.root_bound
    if eng.best_values is None:
        status = TIMEOUT if eng.reason == "budget" else INFEASIBLE
        return SolveOutcome(status, {}, None, bound, wall, eng.nodes)
    assignment = dict(zip(model.names, eng.best_values))
    objective = sign * eng.best_obj
    proved = eng.reason == "exhausted" or (
        eng.reason == "gap" and eng.root_bound is not None and eng.best_obj <= eng.root_bound)
    if proved:
        return SolveOutcome(OPTIMAL, assignment, objective, objective, wall, eng.nodes)
    return SolveOutcome(FEASIBLE, assignment, objective, bound, wall, eng.nodes)
