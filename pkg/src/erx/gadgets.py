"""Hardness-reduction instance generators with independent SAT and Horn
oracles for verifying the intended correspondences.

Three 3-CNF encodings and one Horn encoding are provided.  All use schemas
with object positions only:

  * `gen_3sat`: one soft rule lets a variable merge with a truth constant;
    constraints forbid falsified clauses and, via inequality atoms, force an
    all-or-nothing choice.  The identity merge is optimal (under every
    criterion) exactly when the formula is unsatisfiable.
  * `gen_3sat_restricted_min_a` / `gen_3sat_restricted_max_e`: inequality-free
    variants whose distinguished candidates are cardinality-optimal exactly
    when the formula is unsatisfiable.
  * `gen_horn`: a soft rule opens the door, a hard rule simulates Horn
    derivation, one constraint forbids deriving the query variable.  The
    identity merge is minAS-optimal exactly when the formula entails the
    query.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import Database, DomainError, EquivRel, Fact, obj, tid
from .semantics import Candidate
from .specdsl import Specification, parse_spec


@dataclass(frozen=True)
class Cnf3:
    """A CNF with exactly three (possibly repeated) literals per clause."""

    n: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need at least one variable")
        if not self.clauses:
            raise DomainError("need at least one clause")
        for cl in self.clauses:
            if len(cl) != 3:
                raise DomainError(f"clause {cl} is not width 3")
            for lit in cl:
                if lit == 0 or abs(lit) > self.n:
                    raise DomainError(f"literal {lit} out of range")


@dataclass(frozen=True)
class HornInput:
    """A conjunction of unit variables and clauses (~x | ~y | z), plus a
    query variable; the question is whether the formula entails the query."""

    variables: tuple[str, ...]
    units: tuple[str, ...]
    clauses: tuple[tuple[str, str, str], ...]
    query: str

    def __post_init__(self):
        declared = set(self.variables)
        mentioned = set(self.units) | {v for cl in self.clauses for v in cl} | {self.query}
        missing = mentioned - declared
        if missing:
            raise DomainError(f"undeclared variables: {sorted(missing)}")


def parse_dimacs(text: str) -> Cnf3:
    """DIMACS CNF; clauses shorter than 3 literals are padded by repetition,
    longer ones are rejected."""
    n = None
    lits: list[int] = []
    clauses: list[tuple[int, int, int]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DomainError(f"bad problem line: {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            v = int(tok)
            if v == 0:
                if not lits:
                    raise DomainError("empty clause")
                if len(lits) > 3:
                    raise DomainError(f"clause wider than 3: {lits}")
                while len(lits) < 3:
                    lits.append(lits[-1])
                clauses.append(tuple(lits))
                lits = []
            else:
                lits.append(v)
    if lits:
        raise DomainError("trailing literals without terminating 0")
    if n is None:
        raise DomainError("missing problem line")
    return Cnf3(n, tuple(clauses))


def cnf_to_dimacs(cnf: Cnf3) -> str:
    lines = [f"p cnf {cnf.n} {len(cnf.clauses)}"]
    lines += [" ".join(str(l) for l in cl) + " 0" for cl in cnf.clauses]
    return "\n".join(lines) + "\n"


def parse_horn(text: str) -> HornInput:
    """Line format: `unit x1`, `clause -x1 -x2 x3`, `query x2`."""
    units: list[str] = []
    clauses: list[tuple[str, str, str]] = []
    query = None
    variables: set[str] = set()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "unit" and len(parts) == 2:
            units.append(parts[1])
            variables.add(parts[1])
        elif parts[0] == "clause" and len(parts) == 4:
            negs = [p[1:] for p in parts[1:3] if p.startswith("-")]
            if len(negs) != 2 or parts[3].startswith("-"):
                raise DomainError(f"line {ln}: clause must be -x -y z")
            clauses.append((negs[0], negs[1], parts[3]))
            variables.update(negs)
            variables.add(parts[3])
        elif parts[0] == "query" and len(parts) == 2:
            if query is not None:
                raise DomainError(f"line {ln}: duplicate query")
            query = parts[1]
            variables.add(parts[1])
        else:
            raise DomainError(f"line {ln}: cannot parse {raw!r}")
    if query is None:
        raise DomainError("missing query line")
    if not units and not clauses:
        raise DomainError("formula has no conjuncts")
    return HornInput(tuple(sorted(variables)), tuple(units), tuple(clauses), query)


def horn_to_text(inp: HornInput) -> str:
    lines = [f"unit {u}" for u in inp.units]
    lines += [f"clause -{a} -{b} {h}" for a, b, h in inp.clauses]
    lines.append(f"query {inp.query}")
    return "\n".join(lines) + "\n"


def sat_oracle(cnf: Cnf3, max_vars: int = 12) -> bool:
    """Exhaustive truth-table satisfiability for tiny formulas."""
    if cnf.n > max_vars:
        raise DomainError(f"{cnf.n} variables exceed the oracle guard of {max_vars}")
    for bits in itertools.product((False, True), repeat=cnf.n):
        if all(
            any(bits[abs(l) - 1] == (l > 0) for l in cl)
            for cl in cnf.clauses
        ):
            return True
    return False


def horn_entails(inp: HornInput, max_vars: int = 64) -> bool:
    """Least-model entailment by unit propagation."""
    if len(inp.variables) > max_vars:
        raise DomainError(f"{len(inp.variables)} variables exceed the oracle guard")
    true = set(inp.units)
    changed = True
    while changed:
        changed = False
        for a, b, h in inp.clauses:
            if a in true and b in true and h not in true:
                true.add(h)
                changed = True
    return inp.query in true


@dataclass(frozen=True)
class GadgetInstance:
    db: Database
    spec: Specification
    candidate: Candidate
    spec_text: str


_CLAUSE_RELS = ["".join(bits) for bits in itertools.product("ft", repeat=3)]

_BASE_SCHEMA = "\n".join(
    [f"schema R_{bits}(p1: obj, p2: obj, p3: obj)." for bits in _CLAUSE_RELS]
    + [
        "schema V(var: obj).",
        "schema F(c: obj).",
        "schema T(c: obj).",
        "schema B(c: obj).",
    ]
)

_CLAUSE_DCS = "\n".join(
    f"dc d{k}: R_{bits}[t0](y1, y2, y3), "
    + ", ".join(
        f"{'T' if b == 'f' else 'F'}[t{j}](y{j})" for j, b in enumerate(bits, start=1)
    )
    + "{extra}."
    for k, bits in enumerate(_CLAUSE_RELS, start=1)
)


def _clause_rel(clause: tuple[int, int, int]) -> str:
    return "R_" + "".join("t" if l > 0 else "f" for l in clause)


class _Tids:
    def __init__(self):
        self._count = itertools.count(1)

    def next(self):
        return tid(f"t{next(self._count)}")


def _clause_facts(cnf: Cnf3, schema, tids: _Tids) -> list[Fact]:
    facts = []
    for clause in dict.fromkeys(cnf.clauses):
        rel = schema[_clause_rel(clause)]
        args = tuple(obj(f"x{abs(l)}") for l in clause)
        facts.append(Fact(rel, tids.next(), args))
    return facts


def _base_facts(cnf: Cnf3, schema, tids: _Tids) -> list[Fact]:
    facts = [Fact(schema["V"], tids.next(), (obj(f"x{i}"),)) for i in range(1, cnf.n + 1)]
    facts.append(Fact(schema["T"], tids.next(), (obj("1"),)))
    facts.append(Fact(schema["F"], tids.next(), (obj("0"),)))
    facts.append(Fact(schema["B"], tids.next(), (obj("0"),)))
    facts.append(Fact(schema["B"], tids.next(), (obj("1"),)))
    facts += _clause_facts(cnf, schema, tids)
    return facts


def gen_3sat(cnf: Cnf3) -> GadgetInstance:
    spec_text = "\n".join([
        _BASE_SCHEMA,
        "soft obj sigma: V[t1](x), B[t2](y) => EqO(x, y).",
        "dc d0: F[t1](y), T[t2](y).",
        _CLAUSE_DCS.format(extra=""),
        "dc d9: V[t1](v), B[t2](v), V[t3](x), T[t4](y), F[t5](z), x != y, x != z.",
    ]) + "\n"
    spec = parse_spec(spec_text)
    tids = _Tids()
    db = Database(spec.schema.values(), _base_facts(cnf, spec.schema, tids))
    e_triv = Candidate(EquivRel.identity(db.objects()), EquivRel.identity(db.cells()))
    return GadgetInstance(db, spec, e_triv, spec_text)


def gen_3sat_restricted_min_a(cnf: Cnf3) -> GadgetInstance:
    spec_text = "\n".join([
        _BASE_SCHEMA,
        "schema H(c1: obj, c2: obj).",
        "soft obj sigma: V[t1](x), B[t2](y) => EqO(x, y).",
        "soft obj sigmah: H[t1](x, y) => EqO(x, y).",
        "dc d0: F[t1](y), T[t2](y).",
        _CLAUSE_DCS.format(extra=", H[th](z, z)"),
    ]) + "\n"
    spec = parse_spec(spec_text)
    tids = _Tids()
    facts = _base_facts(cnf, spec.schema, tids)
    facts.append(Fact(spec.schema["H"], tids.next(), (obj("c1"), obj("c2"))))
    db = Database(spec.schema.values(), facts)
    e = EquivRel.close([(obj(f"x{i}"), obj("0")) for i in range(1, cnf.n + 1)], db.objects())
    cand = Candidate(e, EquivRel.identity(db.cells()))
    return GadgetInstance(db, spec, cand, spec_text)


def gen_3sat_restricted_max_e(cnf: Cnf3) -> GadgetInstance:
    spec_text = "\n".join([
        _BASE_SCHEMA,
        "schema H(c1: obj, c2: obj).",
        "schema Vp(var: obj).",
        "schema P(var: obj, copy: obj).",
        "soft obj sigma: V[t1](x), B[t2](y) => EqO(x, y).",
        "soft obj sigmah: H[t1](x, y) => EqO(x, y).",
        "soft obj sigmap: Vp[t1](x), B[t2](y) => EqO(x, y).",
        "dc d0: F[t1](y), T[t2](y).",
        _CLAUSE_DCS.format(extra=", H[th](z, z)"),
        "dc d9: P[t1](y, y).",
    ]) + "\n"
    spec = parse_spec(spec_text)
    tids = _Tids()
    facts = _base_facts(cnf, spec.schema, tids)
    facts.append(Fact(spec.schema["H"], tids.next(), (obj("c1"), obj("c2"))))
    for i in range(1, cnf.n + 1):
        facts.append(Fact(spec.schema["Vp"], tids.next(), (obj(f"x{i}p"),)))
        facts.append(Fact(spec.schema["P"], tids.next(), (obj(f"x{i}"), obj(f"x{i}p"))))
    db = Database(spec.schema.values(), facts)
    gens = [(obj(f"x{i}"), obj("0")) for i in range(1, cnf.n + 1)]
    gens += [(obj(f"x{i}p"), obj("1")) for i in range(1, cnf.n + 1)]
    cand = Candidate(EquivRel.close(gens, db.objects()), EquivRel.identity(db.cells()))
    return GadgetInstance(db, spec, cand, spec_text)


_HORN_SPEC = """\
schema R(lbl: obj, b1: obj, b2: obj, head: obj).
schema C(c1: obj, c2: obj).
schema W(q: obj, qc: obj).

soft obj sigma: C[t1](x, y) => EqO(x, y).
hard obj rho: R[t1](zl, z1, z2, x), R[t2](zl, z1, z2, y), C[t3](z, z) => EqO(x, y).
dc d0: W[t1](y, y).
"""


def gen_horn(inp: HornInput) -> GadgetInstance:
    spec = parse_spec(_HORN_SPEC)
    tids = _Tids()
    facts = [
        Fact(spec.schema["C"], tids.next(), (obj("c1"), obj("c2"))),
        Fact(spec.schema["W"], tids.next(), (obj(inp.query), obj(inp.query + "p"))),
    ]
    label = itertools.count(1)
    for u in inp.units:
        lbl = obj(f"l{next(label)}")
        facts.append(Fact(spec.schema["R"], tids.next(), (lbl, obj("t"), obj("t"), obj(u))))
        facts.append(Fact(spec.schema["R"], tids.next(), (lbl, obj("t"), obj("t"), obj(u + "p"))))
    for a, b, h in inp.clauses:
        lbl = obj(f"l{next(label)}")
        facts.append(Fact(spec.schema["R"], tids.next(), (lbl, obj(a), obj(b), obj(h))))
        facts.append(Fact(spec.schema["R"], tids.next(),
                          (lbl, obj(a + "p"), obj(b + "p"), obj(h + "p"))))
    db = Database(spec.schema.values(), facts)
    e_triv = Candidate(EquivRel.identity(db.objects()), EquivRel.identity(db.cells()))
    return GadgetInstance(db, spec, e_triv, _HORN_SPEC)
