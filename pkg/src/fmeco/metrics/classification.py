"""Accuracy, calibration, selective classification, robustness and fairness."""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Sequence

import numpy as np

from fmeco.metrics.records import PredictionRecord


def _require(records: Sequence[PredictionRecord]) -> None:
    if not records:
        raise ValueError("empty prediction log")


def _confidences(records: Sequence[PredictionRecord]) -> np.ndarray:
    missing = [r.instance_id for r in records if r.confidence is None]
    if missing:
        raise ValueError(f"record {missing[0]!r} has no confidence")
    return np.array([r.confidence for r in records], dtype=float)


def has_confidences(records: Sequence[PredictionRecord]) -> bool:
    return bool(records) and all(r.confidence is not None for r in records)


def accuracy(records: Sequence[PredictionRecord]) -> float:
    _require(records)
    return sum(r.correct for r in records) / len(records)


def ece(records: Sequence[PredictionRecord], bins: int = 10) -> float:
    """Expected calibration error with equal-mass bins.

    Records are sorted by confidence and split into ``bins`` contiguous chunks
    whose sizes differ by at most one; the lowest bins take the remainder.
    Equal confidences are ordered wrong-before-right so that which records share
    a bin never depends on input order. Bin gaps are summed exactly, reading each
    confidence as the shortest decimal that round-trips to it, so decimal inputs
    such as 0.6 and 0.9 give decimal answers.
    """
    if isinstance(bins, bool) or not isinstance(bins, int) or bins < 1:
        raise ValueError(f"bins must be a positive integer, got {bins!r}")
    _require(records)
    conf = _confidences(records)
    if len(records) < bins:
        raise ValueError(f"need at least {bins} records for {bins} bins, got {len(records)}")
    correct = np.array([r.correct for r in records], dtype=float)
    order = np.lexsort((correct, conf))
    exact = [Fraction(repr(float(c))) for c in conf]
    total = Fraction(0)
    for chunk in np.array_split(order, bins):
        # bin weight m/n times |mean gap| is |sum gap| / n
        total += abs(sum((exact[i] for i in chunk), Fraction(0)) - int(correct[chunk].sum()))
    return float(total / len(records))


def _by_confidence_desc(records: Sequence[PredictionRecord]) -> list[PredictionRecord]:
    conf = _confidences(records)
    # sorted() is stable, so equal confidences keep input order.
    order = sorted(range(len(records)), key=lambda i: -conf[i])
    return [records[i] for i in order]


def selective_accuracy(records: Sequence[PredictionRecord], coverage: float) -> float:
    """Accuracy on the ceil(coverage * N) most confident records."""
    _require(records)
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must be in (0, 1], got {coverage!r}")
    ranked = _by_confidence_desc(records)
    # Guard against C*N landing a hair above an integer, e.g. (i/N)*N.
    keep = max(1, math.ceil(coverage * len(ranked) - 1e-9))
    return sum(r.correct for r in ranked[:keep]) / keep


def coverage_accuracy_curve(records: Sequence[PredictionRecord]) -> list[tuple[float, float]]:
    """(coverage, selective accuracy) at coverage i/N for i = 1..N."""
    _require(records)
    ranked = _by_confidence_desc(records)
    n = len(ranked)
    hits = np.cumsum([r.correct for r in ranked])
    return [(i / n, float(hits[i - 1]) / i) for i in range(1, n + 1)]


def coverage_accuracy_auc(records: Sequence[PredictionRecord]) -> float:
    curve = coverage_accuracy_curve(records)
    return sum(acc for _, acc in curve) / len(curve)


def worst_case_accuracy(records: Sequence[PredictionRecord]) -> float:
    """Fraction of instances answered correctly under every variant, original included."""
    _require(records)
    groups: dict[str, list[PredictionRecord]] = defaultdict(list)
    for r in records:
        groups[r.instance_id].append(r)
    score = 0
    for inst, group in groups.items():
        if not any(r.is_original for r in group):
            raise ValueError(f"instance {inst!r} has no original variant")
        score += all(r.correct for r in group)
    return score / len(groups)


def performance_disparities(records: Sequence[PredictionRecord]) -> dict[str, float]:
    """Accuracy per group tag; a record counts toward every tag it carries."""
    hits: dict[str, int] = defaultdict(int)
    totals: dict[str, int] = defaultdict(int)
    for r in records:
        for tag in r.group_tags:
            totals[tag] += 1
            hits[tag] += r.correct
    return {tag: hits[tag] / totals[tag] for tag in sorted(totals)}


def originals(records: Sequence[PredictionRecord]) -> list[PredictionRecord]:
    return [r for r in records if r.is_original]
