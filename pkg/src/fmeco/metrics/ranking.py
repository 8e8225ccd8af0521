from __future__ import annotations

import math

from fmeco.metrics.records import RankedList


def _check_cutoff(cutoff: int) -> None:
    if isinstance(cutoff, bool) or not isinstance(cutoff, int) or cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer, got {cutoff!r}")


def reciprocal_rank(ranked: RankedList, cutoff: int = 10) -> float:
    """1 / rank of the first document with relevance > 0 in the top ``cutoff``."""
    _check_cutoff(cutoff)
    for rank, doc in enumerate(ranked.ranking[:cutoff], start=1):
        if ranked.relevance.get(doc, 0) > 0:
            return 1.0 / rank
    return 0.0


def _gain(rel: float, exponential: bool) -> float:
    return 2.0**rel - 1.0 if exponential else float(rel)


def _dcg(rels, exponential: bool) -> float:
    return sum(_gain(rel, exponential) / math.log2(rank + 1) for rank, rel in enumerate(rels, start=1))


def ndcg(ranked: RankedList, cutoff: int = 10, exponential_gain: bool = True) -> float:
    """NDCG@cutoff; the ideal ordering ranks every judged document by grade.

    Unjudged documents count as relevance 0. Returns 0 when no judged
    document has positive relevance.
    """
    _check_cutoff(cutoff)
    actual = [ranked.relevance.get(doc, 0) for doc in ranked.ranking[:cutoff]]
    ideal = sorted(ranked.relevance.values(), reverse=True)[:cutoff]
    idcg = _dcg(ideal, exponential_gain)
    if idcg == 0:
        return 0.0
    return _dcg(actual, exponential_gain) / idcg
