"""Precision, recall and F1 of a solution's merges against ground truth.

Predicted merges are all non-reflexive pairs of the equivalence relation,
transitive consequences included, since a solution asserts every such
identification.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import EquivRel, Element, norm_pair, obj


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class GroundTruth:
    object_pairs: frozenset[tuple[Element, Element]]
    cell_pairs: frozenset[tuple[Element, Element]] | None = None


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _score_pairs(predicted: frozenset, truth: frozenset) -> Scores:
    hits = len(predicted & truth)
    if predicted:
        precision = hits / len(predicted)
    else:
        precision = 1.0 if not truth else 0.0
    recall = hits / len(truth) if truth else 1.0
    return Scores(precision, recall, f1_score(precision, recall))


def score(e: EquivRel, truth: GroundTruth, v: EquivRel | None = None,
          include_cells: bool = False) -> Scores:
    """Object-level scores by default; cell merges join in only on request."""
    predicted = e.merged_pairs()
    expected = frozenset(norm_pair(*p) for p in truth.object_pairs)
    if include_cells:
        if v is None or truth.cell_pairs is None:
            raise ValueError("cell scoring needs both a cell merge and cell ground truth")
        predicted |= v.merged_pairs()
        expected |= frozenset(norm_pair(*p) for p in truth.cell_pairs)
    return _score_pairs(predicted, expected)


def score_pair_sets(predicted, truth) -> Scores:
    """Score raw pair collections (orientation-free)."""
    return _score_pairs(
        frozenset(norm_pair(*p) for p in predicted),
        frozenset(norm_pair(*p) for p in truth),
    )


def load_ground_truth(path) -> GroundTruth:
    """TSV with two object constants per line."""
    pairs = set()
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{ln}: expected 2 tab-separated fields")
            pairs.add(norm_pair(obj(parts[0]), obj(parts[1])))
    return GroundTruth(frozenset(pairs))
