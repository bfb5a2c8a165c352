"""Solution enumeration, optimal-solution selection, and optimality
recognition: exhaustive witness search in general, a polynomial fixpoint
procedure in the inequality-free restricted setting.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Cell, Database, DomainError, EngineError, EquivRel, element_key, extend
from .query import SimilarityStore, dc_violated
from .semantics import (
    ALL_CRITERIA,
    CARD_CRITERIA,
    Candidate,
    Criterion,
    Pair,
    active_entries,
    criterion_sets,
    identity_candidate,
    in_merge,
    is_candidate,
    is_solution,
    strictly_better,
)
from .specdsl import Specification


class BudgetExceededError(EngineError):
    """The search budget ran out before a conclusive answer was reached."""


class UnsupportedSettingError(EngineError):
    """The restricted recognizer needs inequality-free denial constraints."""


class UnsupportedCriterionError(EngineError):
    """The restricted recognizer covers maxES, minAS and minVS only."""


@dataclass(frozen=True)
class SearchConfig:
    """`method` picks the enumeration strategy: "derive" walks one-pair
    derivations with partition dedup, "subsets" closes every subset of the
    generator universe.  Both yield the same solution set; the subset walk
    is the simpler reference, the derivation walk visits each candidate
    once."""

    max_solutions: int = 1_000_000
    pair_budget: int = 16
    method: str = "derive"

    def __post_init__(self):
        if self.max_solutions < 1 or self.pair_budget < 1:
            raise DomainError("budgets must be positive")
        if self.method not in ("derive", "subsets"):
            raise DomainError(f"unknown search method {self.method!r}")


DEFAULT_CONFIG = SearchConfig()


@dataclass(frozen=True)
class RecognitionResult:
    optimal: bool
    witness: Candidate | None = None


def _pair_sort_key(p: Pair):
    return element_key(p[0]) + element_key(p[1])


def candidate_key(cand: Candidate):
    """Canonical sort key: the merged classes of E then V, as text."""
    def rel_key(rel: EquivRel):
        return tuple(
            tuple(element_key(e) for e in sorted(c, key=element_key))
            for c in rel.merged_classes()
        )
    return (rel_key(cand.E), rel_key(cand.V))


def generator_universe(db: Database, spec: Specification,
                       sim: SimilarityStore) -> tuple[Pair, ...]:
    """Every pair that can appear in any candidate: saturate from identity,
    adding all active pairs (constraints ignored), and collect them."""
    cur = identity_candidate(db)
    collected: set[Pair] = set()
    while True:
        fresh = {p for p, _ in active_entries(db, cur, spec, sim)} - collected
        if not fresh:
            break
        collected |= fresh
        cur = Candidate(
            cur.E.extend(p for p in collected if not isinstance(p[0], Cell)),
            cur.V.extend(p for p in collected if isinstance(p[0], Cell)),
        )
    return tuple(sorted(collected, key=_pair_sort_key))


def _close_subset(db: Database, pairs) -> Candidate:
    pairs = list(pairs)
    obj_pairs = [p for p in pairs if not isinstance(p[0], Cell)]
    cell_pairs = [p for p in pairs if isinstance(p[0], Cell)]
    return Candidate(
        EquivRel.close(obj_pairs, db.objects()),
        EquivRel.close(cell_pairs, db.cells()),
    )


def _constraints_hold(db: Database, spec: Specification, cand: Candidate,
                      sim: SimilarityStore) -> bool:
    """Denial constraints and hard rules only; candidacy checked elsewhere."""
    xdb = extend(db, cand.E, cand.V)
    if any(dc_violated(dc, xdb, sim) for dc in spec.dcs):
        return False
    hard_labels = {r.label for r in spec.hard_rules()}
    return all(
        in_merge(cand, p)
        for p, label in active_entries(db, cand, spec, sim)
        if label in hard_labels
    )


def _candidates_by_subsets(db, spec, sim, universe) -> list[Candidate]:
    seen: set[Candidate] = set()
    out = []
    for mask in range(1 << len(universe)):
        cand = _close_subset(db, (universe[i] for i in range(len(universe)) if mask >> i & 1))
        if cand in seen:
            continue
        seen.add(cand)
        if is_candidate(db, spec, cand, sim):
            out.append(cand)
    return out


def _candidates_by_derivation(db, spec, sim) -> list[Candidate]:
    # Inequality-free constraints are monotone: once violated, every
    # extension stays violated, and any solution's derivation prefixes are
    # below the solution, hence violation-free.  Expanding past a violating
    # state therefore cannot reach further solutions and is skipped.
    prune = spec.restricted and bool(spec.dcs)
    start = identity_candidate(db)
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        if prune:
            xdb = extend(db, cur.E, cur.V)
            if any(dc_violated(dc, xdb, sim) for dc in spec.dcs):
                continue
        for p, _ in active_entries(db, cur, spec, sim):
            if in_merge(cur, p):
                continue
            nxt = _extend_candidate(cur, [p])
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return list(seen)


def enumerate_solutions(db: Database, spec: Specification, sim: SimilarityStore,
                        cfg: SearchConfig = DEFAULT_CONFIG) -> tuple[Candidate, ...]:
    """All solutions, in canonical order.

    Candidates are generated per the configured method, then filtered by
    the constraint and hard-rule checks.  Raises rather than silently
    truncating when the derivable pair universe exceeds the budget.
    """
    universe = generator_universe(db, spec, sim)
    if len(universe) > cfg.pair_budget:
        raise BudgetExceededError(
            f"{len(universe)} derivable pairs exceed the budget of {cfg.pair_budget}"
        )
    if cfg.method == "subsets":
        candidates = _candidates_by_subsets(db, spec, sim, universe)
    else:
        candidates = _candidates_by_derivation(db, spec, sim)
    solutions = [c for c in candidates if _constraints_hold(db, spec, c, sim)]
    solutions.sort(key=candidate_key)
    return tuple(solutions[: cfg.max_solutions])


def optimal_solutions(db: Database, spec: Specification, criterion: Criterion,
                      sim: SimilarityStore,
                      cfg: SearchConfig = DEFAULT_CONFIG) -> tuple[Candidate, ...]:
    """The solutions no other solution strictly beats under the criterion."""
    sols = enumerate_solutions(db, spec, sim, cfg)
    sets = [criterion_sets(db, c, spec, sim) for c in sols]
    out = []
    for i, cand in enumerate(sols):
        if not any(strictly_better(sets[j], sets[i], criterion) for j in range(len(sols))):
            out.append(cand)
    return tuple(out)


def recognize_optimal_bruteforce(db: Database, spec: Specification, cand: Candidate,
                                 criterion: Criterion, sim: SimilarityStore,
                                 cfg: SearchConfig = DEFAULT_CONFIG) -> RecognitionResult:
    """Exhaustive recognition: optimal iff a solution and nothing beats it.

    A non-solution input is rejected without a witness; otherwise the first
    strictly better solution in canonical order is returned as evidence.
    """
    results = recognize_many(db, spec, cand, (criterion,), sim, cfg)
    return results[criterion]


def recognize_many(db: Database, spec: Specification, cand: Candidate,
                   criteria=ALL_CRITERIA, sim: SimilarityStore | None = None,
                   cfg: SearchConfig = DEFAULT_CONFIG) -> dict[Criterion, RecognitionResult]:
    """Brute-force recognition for several criteria over one enumeration."""
    if not is_solution(db, spec, cand, sim):
        return {c: RecognitionResult(False, None) for c in criteria}
    own = criterion_sets(db, cand, spec, sim)
    sols = enumerate_solutions(db, spec, sim, cfg)
    sol_sets = [criterion_sets(db, s, spec, sim) for s in sols]
    out: dict[Criterion, RecognitionResult] = {}
    for c in criteria:
        witness = None
        for other, other_sets in zip(sols, sol_sets):
            if strictly_better(other_sets, own, c):
                witness = other
                break
        out[c] = RecognitionResult(witness is None, witness)
    return out


_RESTRICTED_CRITERIA = (Criterion.MAX_ES, Criterion.MIN_AS, Criterion.MIN_VS)


def recognize_optimal_restricted(db: Database, spec: Specification, cand: Candidate,
                                 criterion: Criterion, sim: SimilarityStore,
                                 cfg: SearchConfig = DEFAULT_CONFIG) -> RecognitionResult:
    """Polynomial recognition for set criteria when no constraint uses
    inequality atoms.

    For each active-but-absent pair, extend the merges by that pair, then
    saturate: hard-rule active pairs are always added; under minAS, pairs
    newly absent (active but unmerged, and not absent originally) are added;
    under minVS the same with (pair, rule) violation entries.  The input is
    not optimal exactly when some saturation lands on a solution, which then
    witnesses a strictly better absent/violation/merge set.  Once a
    constraint breaks along the way no extension can repair it, which is
    what makes the local search complete.
    """
    if not spec.restricted:
        raise UnsupportedSettingError("denial constraints use inequality atoms")
    if criterion in CARD_CRITERIA:
        raise UnsupportedCriterionError(
            f"{criterion.value} stays intractable in the restricted setting"
        )
    if criterion not in _RESTRICTED_CRITERIA:
        raise UnsupportedCriterionError(f"no restricted procedure for {criterion.value}")
    if not is_solution(db, spec, cand, sim):
        return RecognitionResult(False, None)

    base = criterion_sets(db, cand, spec, sim)
    hard_labels = {r.label for r in spec.hard_rules()}
    for seed in sorted(base.absent, key=_pair_sort_key):
        cur = _extend_candidate(cand, [seed])
        while True:
            additions = set()
            for p, label in active_entries(db, cur, spec, sim):
                if in_merge(cur, p):
                    continue
                if label in hard_labels:
                    additions.add(p)
                elif criterion is Criterion.MIN_AS and p not in base.absent:
                    additions.add(p)
                elif criterion is Criterion.MIN_VS and (p, label) not in base.viol:
                    additions.add(p)
            if not additions:
                break
            cur = _extend_candidate(cur, additions)
        if is_solution(db, spec, cur, sim):
            return RecognitionResult(False, cur)
    return RecognitionResult(True, None)


def _extend_candidate(cand: Candidate, pairs) -> Candidate:
    pairs = list(pairs)
    obj_pairs = [p for p in pairs if not isinstance(p[0], Cell)]
    cell_pairs = [p for p in pairs if isinstance(p[0], Cell)]
    return Candidate(cand.E.extend(obj_pairs), cand.V.extend(cell_pairs))
