"""A small integer-program container plus a reader/writer for the LP text format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

BINARY = "B"
INTEGER = "I"

LE, EQ, GE = "<=", "=", ">="
MAXIMIZE, MINIMIZE = "max", "min"

_TERMS_PER_LINE = 8


class LpFormatError(ValueError):
    pass


@dataclass
class Constraint:
    name: str
    terms: dict  # var index -> integer coefficient
    sense: str
    rhs: int

    def activity(self, values) -> int:
        return sum(a * values[v] for v, a in self.terms.items())

    def satisfied(self, values) -> bool:
        act = self.activity(values)
        if self.sense == LE:
            return act <= self.rhs
        if self.sense == GE:
            return act >= self.rhs
        return act == self.rhs


@dataclass
class IlpModel:
    names: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    sense: str = MAXIMIZE
    objective: dict = field(default_factory=dict)
    objective_constant: int = 0
    # bookkeeping filled in by the MPP builders
    var_of_arc: dict = field(default_factory=dict)     # (robot, arc) -> var
    goal_hold_var: dict = field(default_factory=dict)  # (robot, t) -> var
    stay_var: dict = field(default_factory=dict)       # (robot, t) -> var
    max_var: int | None = None
    trivially_infeasible: bool = False
    compact_rows: bool = False
    # valid rows implied by the flow structure; used by the embedded search only,
    # never exported (lists of Constraint)
    implied: list = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_var(self, name: str, kind: str = BINARY, lower: int = 0, upper: int = 1) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if lower > upper:
            raise ValueError(f"empty domain for {name}")
        self._index[name] = len(self.names)
        self.names.append(name)
        self.kinds.append(kind)
        self.lower.append(int(lower))
        self.upper.append(int(upper))
        return len(self.names) - 1

    def var(self, name: str) -> int:
        return self._index[name]

    def add_constraint(self, name: str, terms, sense: str, rhs: int) -> Constraint:
        if sense not in (LE, EQ, GE):
            raise ValueError(f"bad sense {sense!r}")
        merged: dict[int, int] = {}
        for v, a in (terms.items() if isinstance(terms, dict) else terms):
            if int(a) != a:
                raise ValueError("coefficients must be integers")
            merged[v] = merged.get(v, 0) + int(a)
        merged = {v: a for v, a in merged.items() if a != 0}
        con = Constraint(name, merged, sense, int(rhs))
        self.constraints.append(con)
        return con

    def set_objective(self, sense: str, terms, constant: int = 0) -> None:
        if sense not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"bad objective sense {sense!r}")
        self.sense = sense
        merged: dict[int, int] = {}
        for v, a in (terms.items() if isinstance(terms, dict) else terms):
            merged[v] = merged.get(v, 0) + int(a)
        self.objective = {v: a for v, a in merged.items() if a != 0}
        self.objective_constant = int(constant)

    def evaluate(self, values) -> int:
        return self.objective_constant + sum(a * values[v] for v, a in self.objective.items())

    def violations(self, values) -> list[str]:
        """Names of violated rows and bounds under ``values`` (exact integers)."""
        bad = []
        for v in range(self.n_vars):
            x = values[v]
            if int(x) != x or not self.lower[v] <= x <= self.upper[v]:
                bad.append(f"bound:{self.names[v]}")
        bad += [c.name for c in self.constraints if not c.satisfied(values)]
        return bad

    def check(self) -> None:
        """Structural invariants: every variable is used, coefficients are integers."""
        used = set(self.objective)
        for c in self.constraints:
            used.update(c.terms)
        unused = [self.names[v] for v in range(self.n_vars) if v not in used]
        if unused:
            raise ValueError(f"variables without any row: {unused[:5]}")

    def same_as(self, other: "IlpModel") -> bool:
        if (self.names, self.kinds, self.lower, self.upper) != \
                (other.names, other.kinds, other.lower, other.upper):
            return False
        if (self.sense, self.objective, self.objective_constant) != \
                (other.sense, other.objective, other.objective_constant):
            return False
        if len(self.constraints) != len(other.constraints):
            return False
        return all((a.name, a.terms, a.sense, a.rhs) == (b.name, b.terms, b.sense, b.rhs)
                   for a, b in zip(self.constraints, other.constraints))


def _expr_lines(model: IlpModel, terms: dict, constant: int = 0) -> list[str]:
    pieces = []
    for v, a in terms.items():
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = model.names[v] if mag == 1 else f"{mag} {model.names[v]}"
        pieces.append(f"{sign} {body}")
    if constant:
        pieces.append(f"{'-' if constant < 0 else '+'} {abs(constant)}")
    if not pieces:
        pieces = ["0"]
    if pieces[0].startswith("+ "):
        pieces[0] = pieces[0][2:]
    return [" ".join(pieces[k:k + _TERMS_PER_LINE])
            for k in range(0, len(pieces), _TERMS_PER_LINE)]


def export_lp(model: IlpModel) -> bytes:
    out = ["Maximize" if model.sense == MAXIMIZE else "Minimize"]
    obj = _expr_lines(model, model.objective, model.objective_constant)
    out.append(" obj: " + obj[0])
    out += ["   " + line for line in obj[1:]]
    out.append("Subject To")
    for c in model.constraints:
        body = _expr_lines(model, c.terms)
        if len(body) == 1:
            out.append(f" {c.name}: {body[0]} {c.sense} {c.rhs}")
        else:
            out.append(f" {c.name}: {body[0]}")
            out += ["   " + line for line in body[1:-1]]
            out.append(f"   {body[-1]} {c.sense} {c.rhs}")
    bounded = [v for v in range(model.n_vars) if model.kinds[v] == INTEGER]
    if bounded:
        out.append("Bounds")
        out += [f" {model.lower[v]} <= {model.names[v]} <= {model.upper[v]}" for v in bounded]
    binaries = [model.names[v] for v in range(model.n_vars) if model.kinds[v] == BINARY]
    if binaries:
        out.append("Binary")
        out += [" " + name for name in binaries]
    if bounded:
        out.append("General")
        out += [" " + model.names[v] for v in bounded]
    out.append("End")
    return ("\n".join(out) + "\n").encode("ascii")


_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|=|<|>|[+-]|:|\d+|[A-Za-z_][\w.]*)")
_SECTIONS = {"maximize": "obj", "maximum": "obj", "max": "obj", "minimize": "obj",
             "minimum": "obj", "min": "obj", "subject": "st", "st": "st", "s.t.": "st",
             "bounds": "bounds", "binary": "bin", "binaries": "bin", "bin": "bin",
             "general": "gen", "generals": "gen", "gen": "gen", "end": "end"}


def _tokens(text: str) -> list[str]:
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LpFormatError(f"cannot tokenize near {text[pos:pos + 20]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


def _parse_expr(toks, pos, stop):
    """Parse ``[+-] [coef] name ...`` until a token in ``stop``; returns (terms, const, pos)."""
    terms: list[tuple[str, int]] = []
    const = 0
    sign = 1
    coef = None
    while pos < len(toks) and toks[pos] not in stop:
        tok = toks[pos]
        if tok in "+-":
            if coef is not None:
                const += sign * coef
                coef = None
            sign = 1 if tok == "+" else -1
        elif tok.isdigit():
            if coef is not None:
                raise LpFormatError("two numbers in a row")
            coef = int(tok)
        else:
            terms.append((tok, sign * (1 if coef is None else coef)))
            sign, coef = 1, None
        pos += 1
    if coef is not None:
        const += sign * coef
    return terms, const, pos


def parse_lp(data: bytes | str) -> IlpModel:
    """Read the LP dialect written by :func:`export_lp`."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    sections: dict[str, list[str]] = {}
    order: list[str] = []
    sense = None
    current = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().lower()
        key = head.split()[0] if head else ""
        if not raw[:1].isspace() and (key in _SECTIONS or head == "subject to"):
            current = _SECTIONS[key]
            if current == "obj":
                sense = MAXIMIZE if key.startswith("max") else MINIMIZE
            sections.setdefault(current, [])
            order.append(current)
            if current == "end":
                break
            continue
        if current is None:
            raise LpFormatError(f"content before any section: {line!r}")
        sections[current].append(line)
    if sense is None or "end" not in sections:
        raise LpFormatError("missing objective sense or End")

    kinds: dict[str, str] = {}
    bounds: dict[str, tuple[int, int]] = {}
    for line in sections.get("bin", []):
        for name in line.split():
            kinds[name] = BINARY
    for line in sections.get("gen", []):
        for name in line.split():
            kinds[name] = INTEGER
    for line in sections.get("bounds", []):
        toks = _tokens(line)
        if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            bounds[toks[2]] = (int(toks[0]), int(toks[4]))
        else:
            raise LpFormatError(f"unsupported bound line {line!r}")

    model = IlpModel()
    # binaries first, then generals: the builders create integer variables last
    for line in sections.get("bin", []) + sections.get("gen", []):
        for name in line.split():
            if name not in model._index:
                lo, hi = bounds.get(name, (0, 1))
                model.add_var(name, kinds[name], lo, hi)

    def declare(name):
        if name not in model._index:
            raise LpFormatError(f"variable {name} has no Binary/General declaration")
        return model._index[name]

    toks = _tokens(" ".join(sections["obj"]))
    if toks[:2] and toks[1] == ":":
        toks = toks[2:]
    terms, const, _ = _parse_expr(toks, 0, set())
    model.set_objective(sense, [(declare(nm), a) for nm, a in terms], const)

    toks = _tokens(" ".join(sections.get("st", [])))
    pos = 0
    count = 0
    while pos < len(toks):
        name = f"c{count}"
        if pos + 1 < len(toks) and toks[pos + 1] == ":":
            name = toks[pos]
            pos += 2
        terms, const, pos = _parse_expr(toks, pos, {"<=", ">=", "=<", "=>", "=", "<", ">"})
        if pos >= len(toks):
            raise LpFormatError(f"constraint {name} has no sense")
        op = {"=<": LE, "<": LE, "=>": GE, ">": GE}.get(toks[pos], toks[pos])
        pos += 1
        rhs_sign = 1
        if toks[pos] in "+-":
            rhs_sign = -1 if toks[pos] == "-" else 1
            pos += 1
        rhs = rhs_sign * int(toks[pos]) - const
        pos += 1
        model.add_constraint(name, [(declare(nm), a) for nm, a in terms], op, rhs)
        count += 1
    return model

