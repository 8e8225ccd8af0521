"""Two-rater agreement statistics and disagreement resolution.

All statistics are exact ``Fraction`` values; callers round at emission.
Only indicators that both raters actually scored are compared.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from fmeco.index.schema import NOT_APPLICABLE, ScoreSheet

Resolution = Union[int, str]


def _common_pairs(a: ScoreSheet, b: ScoreSheet) -> list[tuple[int, int]]:
    if a.entity_id != b.entity_id:
        raise ValueError(f"sheets score different entities: {a.entity_id!r} vs {b.entity_id!r}")
    if a.schema_name and b.schema_name and a.schema_name != b.schema_name:
        raise ValueError(f"sheets use different schemas: {a.schema_name!r} vs {b.schema_name!r}")
    common = sorted(set(a.scores) & set(b.scores))
    return [(a.scores[i], b.scores[i]) for i in common]


def _pooled(pairs: Iterable[tuple[ScoreSheet, ScoreSheet]]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for a, b in pairs:
        out.extend(_common_pairs(a, b))
    return out


def agreement_from_pairs(pairs: list[tuple[int, int]]) -> Fraction:
    if not pairs:
        raise ValueError("no commonly scored indicators to compare")
    return Fraction(sum(x == y for x, y in pairs), len(pairs))


def kappa_from_pairs(pairs: list[tuple[int, int]]) -> Optional[Fraction]:
    """Unweighted Cohen's kappa; ``None`` when chance agreement is 1."""
    p_o = agreement_from_pairs(pairs)
    n = len(pairs)
    first = Counter(x for x, _ in pairs)
    second = Counter(y for _, y in pairs)
    p_e = sum(Fraction(first[c] * second[c], n * n) for c in first.keys() & second.keys())
    if p_e == 1:
        return None
    return (p_o - p_e) / (1 - p_e)


def agreement_rate(a: ScoreSheet, b: ScoreSheet) -> Fraction:
    return agreement_from_pairs(_common_pairs(a, b))


def cohens_kappa(a: ScoreSheet, b: ScoreSheet) -> Optional[Fraction]:
    return kappa_from_pairs(_common_pairs(a, b))


def pooled_agreement(pairs: Iterable[tuple[ScoreSheet, ScoreSheet]]) -> Fraction:
    """Agreement over every (indicator, entity) pair across several entities."""
    return agreement_from_pairs(_pooled(pairs))


def pooled_kappa(pairs: Iterable[tuple[ScoreSheet, ScoreSheet]]) -> Optional[Fraction]:
    return kappa_from_pairs(_pooled(pairs))


def disagreements(a: ScoreSheet, b: ScoreSheet) -> list[str]:
    """Indicators whose entries differ, counting unscored and not-applicable as entries."""
    ids = set(a.scores) | set(b.scores) | a.not_applicable | b.not_applicable
    return sorted(i for i in ids if a.entry(i) != b.entry(i))


def _merge_text(a: ScoreSheet, b: ScoreSheet, field: str, iid: str) -> Optional[str]:
    parts = []
    for sheet in (a, b):
        text = getattr(sheet, field).get(iid)
        if text:
            parts.append(f"[{sheet.rater_id}] {text}")
    return " | ".join(parts) if parts else None


def resolve(
    a: ScoreSheet,
    b: ScoreSheet,
    resolutions: Mapping[str, Resolution],
    rater_id: str = "resolved",
) -> ScoreSheet:
    """Merge two raters' sheets, taking agreed entries and resolutions elsewhere.

    ``resolutions`` must cover exactly the disagreeing indicators; a value may be
    ``NOT_APPLICABLE``.
    """
    disputed = disagreements(a, b)
    missing = [i for i in disputed if i not in resolutions]
    if missing:
        raise ValueError(f"no resolution for disagreement on indicator {missing[0]!r}")
    extra = sorted(set(resolutions) - set(disputed))
    if extra:
        raise ValueError(f"resolution supplied for indicator {extra[0]!r}, where raters agree")
    if a.entity_id != b.entity_id:
        raise ValueError(f"sheets score different entities: {a.entity_id!r} vs {b.entity_id!r}")

    scores: dict[str, int] = {}
    not_applicable: set[str] = set()
    ids = set(a.scores) | set(b.scores) | a.not_applicable | b.not_applicable
    for iid in sorted(ids):
        value = resolutions[iid] if iid in resolutions else a.entry(iid)
        if value == NOT_APPLICABLE:
            not_applicable.add(iid)
        elif value is not None:
            scores[iid] = value

    sources, justifications = {}, {}
    for iid in scores:
        src = _merge_text(a, b, "sources", iid)
        if src:
            sources[iid] = src
        just = _merge_text(a, b, "justifications", iid)
        if just:
            justifications[iid] = just
    new_info = (a.new_information | b.new_information) & set(scores)
    return ScoreSheet(
        rater_id=rater_id,
        entity_id=a.entity_id,
        scores=scores,
        sources=sources,
        justifications=justifications,
        new_information=frozenset(new_info),
        not_applicable=frozenset(not_applicable),
        schema_name=a.schema_name or b.schema_name,
    )
