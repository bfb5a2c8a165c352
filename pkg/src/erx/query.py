"""Evaluation of conjunctive queries with similarity and inequality atoms
over set-valued extended databases.

A witness assigns one extended fact to each relational atom; a variable's
candidate set is the intersection of the constant sets at all its argument
positions.  On top of that:

  * constants must belong to the set at their position;
  * an inequality atom holds when the two candidate sets are disjoint after
    nulls are removed from both sides;
  * a similarity atom holds when some non-null pair of candidates reaches
    the atom's threshold;
  * a variable shared between two or more value positions never joins via
    the null constant (two nulls are not the same value).

Free variables are answered with the *original* constant stored at their
occurrence positions in the witnessing facts, which keeps answer sets stable
under later merges and matches ordinary evaluation when no merges exist.
Boolean queries (no free variables) realise the set-witness semantics
directly, so denial-constraint checking is unaffected by the anchoring.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .core import (
    Constant,
    EngineError,
    ExtendedDatabase,
    ExtFact,
    NULL,
    Sort,
    is_null,
    norm_pair,
    val,
)
from .specdsl import (
    Atom,
    ConstTerm,
    DenialConstraint,
    NeqAtom,
    ObjectRule,
    RelAtom,
    SimAtom,
    TidVar,
    ValueRule,
    Var,
)


class UnsafeQueryError(EngineError):
    """A variable occurs in no relational atom, so it has no candidate set."""


@dataclass(frozen=True)
class Query:
    """A conjunctive query: free-variable names plus a body."""

    free: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((self.free, self.atoms)))

    def __hash__(self):
        return self._h


@lru_cache(maxsize=4096)
def rule_body_query(rule: ObjectRule | ValueRule) -> Query:
    if isinstance(rule, ObjectRule):
        return Query(rule.head, rule.body)
    return Query(rule.head_tids, rule.body)


@lru_cache(maxsize=4096)
def dc_body_query(dc: DenialConstraint) -> Query:
    return Query((), dc.body)


class SimilarityStore:
    """Symmetric integer similarity scores in [0, 100] over value constants.

    Unkeyed pairs score 0; identical non-null constants score 100; the null
    constant scores 0 against everything and is never stored.
    """

    __slots__ = ("_scores",)

    def __init__(self, scores: Iterable[tuple[Constant, Constant, int]] = ()):
        self._scores: dict[tuple[Constant, Constant], int] = {}
        for a, b, s in scores:
            self.put(a, b, s)

    def put(self, a: Constant, b: Constant, score: int):
        if is_null(a) or is_null(b):
            raise EngineError("null never takes part in similarity")
        if not 0 <= score <= 100:
            raise EngineError(f"similarity score {score} out of range")
        if a != b:
            self._scores[norm_pair(a, b)] = score

    def score(self, a: Constant, b: Constant) -> int:
        if is_null(a) or is_null(b):
            return 0
        if a == b:
            return 100
        return self._scores.get(norm_pair(a, b), 0)

    def items(self):
        return sorted(self._scores.items(), key=lambda kv: (kv[0][0].text, kv[0][1].text))

    def updated(self, other: "SimilarityStore") -> "SimilarityStore":
        """A copy where `other`'s scores take precedence."""
        merged = SimilarityStore()
        merged._scores.update(self._scores)
        merged._scores.update(other._scores)
        return merged

    def __len__(self):
        return len(self._scores)


EMPTY_SIM = SimilarityStore()


@lru_cache(maxsize=8192)
def _query_plan(q: Query, db):
    """Static per-query data: relational atoms, variable occurrence map
    (atom index, position with 0 the tid slot), and the variables whose
    multiple value-position occurrences must never join via null.  Also
    performs the safety check.  Callers must not mutate the returned maps."""
    rel_atoms = tuple(a for a in q.atoms if isinstance(a, RelAtom))
    occ: dict[str, list[tuple[int, int]]] = {}
    counts: dict[str, int] = {}
    for ai, atom in enumerate(rel_atoms):
        decl = db.schema[atom.rel]
        occ.setdefault(atom.tid.name, []).append((ai, 0))
        for pos, term in enumerate(atom.args, start=1):
            if isinstance(term, (Var, TidVar)):
                occ.setdefault(term.name, []).append((ai, pos))
                if decl.type_vec[pos - 1] is Sort.VAL:
                    counts[term.name] = counts.get(term.name, 0) + 1
    strip_vars = frozenset(v for v, n in counts.items() if n >= 2)

    used_vars = set(occ)
    for atom in q.atoms:
        if isinstance(atom, (SimAtom, NeqAtom)):
            for t in (atom.left, atom.right):
                if isinstance(t, (Var, TidVar)):
                    used_vars.add(t.name)
    for name in sorted(used_vars | set(q.free)):
        if name not in occ:
            raise UnsafeQueryError(f"variable {name!r} occurs in no relational atom")
    return rel_atoms, occ, strip_vars


def _witnesses(q: Query, xdb: ExtendedDatabase) -> Iterator[tuple[list[ExtFact], dict[str, frozenset[Constant]]]]:
    """Yield (chosen facts, final variable candidate sets) for each witness."""
    rel_atoms, occ, strip_vars = _query_plan(q, xdb.db)
    n = len(rel_atoms)
    chosen: list[ExtFact | None] = [None] * n

    def descend(i: int, inter: dict[str, frozenset[Constant]]):
        if i == n:
            final = dict(inter)
            ok = True
            for v in strip_vars:
                stripped = final[v] - {NULL}
                if not stripped:
                    ok = False
                    break
                final[v] = stripped
            if ok:
                yield list(chosen), final
            return
        atom = rel_atoms[i]
        decl = xdb.db.schema[atom.rel]
        for xf in xdb.facts_of(atom.rel):
            nxt = dict(inter)
            good = True
            for pos in range(0, len(atom.args) + 1):
                term = atom.tid if pos == 0 else atom.args[pos - 1]
                s = xf.set_at(pos)
                if isinstance(term, ConstTerm):
                    if Constant(decl.type_vec[pos - 1], term.text) not in s:
                        good = False
                        break
                else:
                    prev = nxt.get(term.name)
                    merged = s if prev is None else prev & s
                    if not merged:
                        good = False
                        break
                    nxt[term.name] = merged
            if good:
                chosen[i] = xf
                yield from descend(i + 1, nxt)
        chosen[i] = None

    yield from descend(0, {})


def _term_set(t, inter: dict[str, frozenset[Constant]]) -> frozenset[Constant]:
    if isinstance(t, ConstTerm):
        return frozenset((val(t.text),))
    return inter[t.name]


def _conditions_hold(q: Query, inter: dict[str, frozenset[Constant]], sim: SimilarityStore) -> bool:
    for atom in q.atoms:
        if isinstance(atom, NeqAtom):
            left = _term_set(atom.left, inter) - {NULL}
            right = _term_set(atom.right, inter) - {NULL}
            if left & right:
                return False
        elif isinstance(atom, SimAtom):
            left = _term_set(atom.left, inter)
            right = _term_set(atom.right, inter)
            if not any(
                sim.score(a, b) >= atom.threshold
                for a in left if not is_null(a)
                for b in right if not is_null(b)
            ):
                return False
    return True


def _anchors(name: str, occ: dict[str, list[tuple[int, int]]], chosen: list[ExtFact],
             inter: dict[str, frozenset[Constant]]) -> frozenset[Constant]:
    cands = set()
    for ai, pos in occ[name]:
        xf = chosen[ai]
        orig = xf.tid if pos == 0 else xf.orig.args[pos - 1]
        if orig in inter[name]:
            cands.add(orig)
    return frozenset(cands)


def eval_query(q: Query, xdb: ExtendedDatabase, sim: SimilarityStore = EMPTY_SIM) -> frozenset[tuple[Constant, ...]]:
    """All answer tuples of q over the extended database."""
    _, occ, _ = _query_plan(q, xdb.db)
    answers: set[tuple[Constant, ...]] = set()
    for chosen, inter in _witnesses(q, xdb):
        if not _conditions_hold(q, inter, sim):
            continue
        if not q.free:
            return frozenset({()})
        pools = [_anchors(v, occ, chosen, inter) for v in q.free]
        if any(not pool for pool in pools):
            continue
        stack = [()]
        for pool in pools:
            stack = [t + (c,) for t in stack for c in pool]
        answers.update(stack)
    return frozenset(answers)


def eval_boolean(q: Query, xdb: ExtendedDatabase, sim: SimilarityStore = EMPTY_SIM) -> bool:
    """True iff the query, read as a Boolean query, is satisfied."""
    if q.free:
        q = Query((), q.atoms)
    return bool(eval_query(q, xdb, sim))


@lru_cache(maxsize=65536)
def _boolean_cached(q: Query, xdb: ExtendedDatabase, sim: SimilarityStore) -> bool:
    return eval_boolean(q, xdb, sim)


def dc_violated(dc: DenialConstraint, xdb: ExtendedDatabase, sim: SimilarityStore) -> bool:
    """A denial constraint is violated when its body is satisfiable.

    Memoised: extended databases are shared objects (hashed by identity),
    so the check runs once per constraint and merge state.
    """
    return _boolean_cached(dc_body_query(dc), xdb, sim)
