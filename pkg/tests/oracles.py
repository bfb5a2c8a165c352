"""Independent reference implementations used to compute expected values.

Everything here is deliberately naive and kept separate from the package:
closure by repeated pairwise saturation, recursive edit distance, a direct
transcription of Jaro-Winkler, dense TF-IDF vectors, substitution-based
conjunctive-query evaluation, unrestricted witness search, and breadth-first
exploration of one-pair-at-a-time derivations.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

from erx.core import Cell, NULL, Sort, extend, is_null
from erx.query import SimilarityStore
from erx.semantics import Candidate, active_entries, identity_candidate, in_merge
from erx.specdsl import ConstTerm, NeqAtom, RelAtom, SimAtom, TidVar, Var


def close_by_saturation(pairs, universe):
    """Reflexive-symmetric-transitive closure as an explicit pair set."""
    rel = {(e, e) for e in universe}
    rel.update((a, b) for a, b in pairs)
    rel.update((b, a) for a, b in pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return rel


def levenshtein_recursive(a: str, b: str) -> int:
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )
    return d(len(a), len(b))


def jaro_winkler_direct(s1: str, s2: str) -> float:
    """Straight transcription of the definition: match window, flags,
    transposition count, prefix boost."""
    if s1 == s2:
        return 1.0
    len1, len2 = len(s1), len(s2)
    if len1 == 0 or len2 == 0:
        return 0.0
    match_window = max(max(len1, len2) // 2 - 1, 0)
    flags1 = [False] * len1
    flags2 = [False] * len2
    m = 0
    for i in range(len1):
        for j in range(max(0, i - match_window), min(len2, i + match_window + 1)):
            if not flags2[j] and s1[i] == s2[j]:
                flags1[i] = flags2[j] = True
                m += 1
                break
    if m == 0:
        return 0.0
    ms1 = [s1[i] for i in range(len1) if flags1[i]]
    ms2 = [s2[j] for j in range(len2) if flags2[j]]
    transpositions = sum(1 for a, b in zip(ms1, ms2) if a != b) // 2
    jaro = (m / len1 + m / len2 + (m - transpositions) / m) / 3
    prefix = 0
    for a, b in zip(s1, s2):
        if a != b or prefix == 4:
            break
        prefix += 1
    return jaro + prefix * 0.1 * (1 - jaro)


def tfidf_cosine_dense(a: str, b: str, corpus) -> float:
    """Dense-vector TF-IDF cosine with tf = raw count, idf = ln(N/df)."""
    docs = [d.lower().split() for d in corpus]
    vocab = sorted({tok for d in docs for tok in d} | set(a.lower().split()) | set(b.lower().split()))
    n = len(docs)

    def vector(s):
        toks = s.lower().split()
        vec = []
        for term in vocab:
            df = sum(1 for d in docs if term in d)
            idf = math.log(n / df) if df else 0.0
            vec.append(toks.count(term) * idf)
        return vec

    va, vb = vector(a), vector(b)
    dot = sum(x * y for x, y in zip(va, vb))
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def naive_identity_answers(q, db, sim: SimilarityStore):
    """Substitution-based evaluation over the original facts.

    Sound only for merge-free databases (the textbook case the engine must
    match under identity merges); instances are expected to be null-free.
    """
    rel_atoms = [a for a in q.atoms if isinstance(a, RelAtom)]
    answers = set()

    def atom_matches(assignment):
        for atom in q.atoms:
            if isinstance(atom, SimAtom):
                lv = assignment[atom.left.name] if isinstance(atom.left, Var) else None
                rv = assignment[atom.right.name] if isinstance(atom.right, Var) else None
                if lv is None or rv is None or sim.score(lv, rv) < atom.threshold:
                    return False
            elif isinstance(atom, NeqAtom):
                lv = assignment[atom.left.name]
                rv = assignment[atom.right.name]
                if lv == rv:
                    return False
        return True

    def unify(i, assignment):
        if i == len(rel_atoms):
            if atom_matches(assignment):
                answers.add(tuple(assignment[v] for v in q.free))
            return
        atom = rel_atoms[i]
        for fact in db.facts_of(atom.rel):
            trial = dict(assignment)
            ok = True
            for pos in range(len(atom.args) + 1):
                term = atom.tid if pos == 0 else atom.args[pos - 1]
                actual = fact.tid if pos == 0 else fact.args[pos - 1]
                if isinstance(term, ConstTerm):
                    if actual.text != term.text or actual.sort is Sort.NULL:
                        ok = False
                        break
                else:
                    if term.name in trial and trial[term.name] != actual:
                        ok = False
                        break
                    trial[term.name] = actual
            if ok:
                unify(i + 1, trial)

    unify(0, {})
    return frozenset(answers)


def boolean_by_unrestricted_search(q, xdb, sim: SimilarityStore) -> bool:
    """Witness search with per-atom set vectors drawn from all subsets of
    the constants of the database, filtered only by the witness conditions
    themselves.  Exponential; tiny inputs only."""
    dom = set()
    for f in xdb.db.facts:
        dom.add(f.tid)
        dom.update(f.args)
    subsets = [frozenset(c) for r in range(len(dom) + 1)
               for c in itertools.combinations(sorted(dom, key=repr), r)]
    rel_atoms = [a for a in q.atoms if isinstance(a, RelAtom)]

    per_atom_vectors = []
    for atom in rel_atoms:
        ext_shapes = {
            tuple([xf.set_at(0)] + list(xf.argsets)) for xf in xdb.facts_of(atom.rel)
        }
        good = []
        for vec in itertools.product(subsets, repeat=len(atom.args) + 1):
            if vec not in ext_shapes:
                continue
            ok = True
            for pos in range(len(atom.args) + 1):
                term = atom.tid if pos == 0 else atom.args[pos - 1]
                if isinstance(term, ConstTerm) and not any(
                    c.text == term.text and not is_null(c) for c in vec[pos]
                ):
                    ok = False
                    break
            if ok:
                good.append(vec)
        per_atom_vectors.append(good)

    def value_join_vars():
        counts = {}
        for atom in rel_atoms:
            decl = xdb.db.schema[atom.rel]
            for pos, term in enumerate(atom.args, start=1):
                if isinstance(term, Var) and decl.type_vec[pos - 1] is Sort.VAL:
                    counts[term.name] = counts.get(term.name, 0) + 1
        return {v for v, k in counts.items() if k >= 2}

    strip = value_join_vars()

    for combo in itertools.product(*per_atom_vectors):
        h: dict[str, frozenset] = {}
        ok = True
        for atom, vec in zip(rel_atoms, combo):
            for pos in range(len(atom.args) + 1):
                term = atom.tid if pos == 0 else atom.args[pos - 1]
                if isinstance(term, (Var, TidVar)):
                    prev = h.get(term.name)
                    h[term.name] = vec[pos] if prev is None else prev & vec[pos]
        for name, s in h.items():
            if name in strip:
                s = s - {NULL}
                h[name] = s
            if not s:
                ok = False
        if not ok:
            continue

        def term_set(t):
            if isinstance(t, ConstTerm):
                match = {c for c in dom if c.text == t.text and not is_null(c)}
                return frozenset(match)
            return h[t.name]

        for atom in q.atoms:
            if isinstance(atom, NeqAtom):
                if (term_set(atom.left) - {NULL}) & (term_set(atom.right) - {NULL}):
                    ok = False
                    break
            elif isinstance(atom, SimAtom):
                if not any(
                    sim.score(x, y) >= atom.threshold
                    for x in term_set(atom.left) if not is_null(x)
                    for y in term_set(atom.right) if not is_null(y)
                ):
                    ok = False
                    break
        if ok:
            return True
    return False


def reachable_candidates(db, spec, sim, cap=5000):
    """All candidates reachable by one-active-pair-at-a-time derivations."""
    start = identity_candidate(db)
    seen = {start}
    stack = [start]
    while stack:
        if len(seen) > cap:
            raise RuntimeError("candidate space larger than the oracle cap")
        cur = stack.pop()
        for p, _ in active_entries(db, cur, spec, sim):
            if in_merge(cur, p):
                continue
            if isinstance(p[0], Cell):
                nxt = Candidate(cur.E, cur.V.extend([p]))
            else:
                nxt = Candidate(cur.E.extend([p]), cur.V)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def merged_pair_set(rel):
    """Non-reflexive unordered pairs of an equivalence relation, from classes."""
    out = set()
    for cls in rel.merged_classes():
        for a, b in itertools.combinations(sorted(cls, key=repr), 2):
            out.add(frozenset((a, b)))
    return out
