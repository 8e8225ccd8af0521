"""Score aggregation, entity-to-entity matching, cohorts and longitudinal change.

Points are integers and ratios are ``Fraction``; nothing is rounded here.
Aggregation levels are keyed as ``"overall"``, ``"domain:<name>"`` and
``"subdomain:<name>"``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from fmeco.index.schema import IndicatorSchema, ScoreSheet


@dataclass(frozen=True)
class LevelScore:
    points: int
    max: int

    @property
    def fraction(self) -> Optional[Fraction]:
        # max is 0 only when every indicator in the level is not applicable.
        return Fraction(self.points, self.max) if self.max else None


@dataclass(frozen=True)
class AggregateReport:
    entity_id: str
    overall: int
    overall_max: int
    per_domain: dict[str, LevelScore]
    per_subdomain: dict[str, LevelScore]

    @property
    def fraction(self) -> Optional[Fraction]:
        return Fraction(self.overall, self.overall_max) if self.overall_max else None

    def levels(self) -> dict[str, int]:
        out = {"overall": self.overall}
        out.update({f"domain:{d}": s.points for d, s in self.per_domain.items()})
        out.update({f"subdomain:{s}": v.points for s, v in self.per_subdomain.items()})
        return out


def _earned(final: ScoreSheet, schema: IndicatorSchema) -> dict[str, Optional[int]]:
    """Points per indicator; ``None`` for not-applicable indicators."""
    final.check(schema)
    earned: dict[str, Optional[int]] = {}
    for ind in schema.indicators:
        entry = final.entry(ind.id)
        if ind.id in final.not_applicable:
            earned[ind.id] = None
        elif entry is None:
            if not schema.default_zero:
                raise ValueError(
                    f"entity {final.entity_id!r}: indicator {ind.id!r} is unscored "
                    f"and schema {schema.name!r} has no default-zero rule"
                )
            earned[ind.id] = 0
        else:
            earned[ind.id] = entry
    return earned


def aggregate(final: ScoreSheet, schema: IndicatorSchema) -> AggregateReport:
    earned = _earned(final, schema)
    dom_pts: dict[str, int] = defaultdict(int)
    dom_max: dict[str, int] = defaultdict(int)
    sub_pts: dict[str, int] = defaultdict(int)
    sub_max: dict[str, int] = defaultdict(int)
    for ind in schema.indicators:
        pts = earned[ind.id]
        if pts is None:
            continue
        dom_pts[ind.domain] += pts
        dom_max[ind.domain] += ind.scale_max
        sub_pts[ind.subdomain] += pts
        sub_max[ind.subdomain] += ind.scale_max
    per_domain = {d: LevelScore(dom_pts[d], dom_max[d]) for d in schema.domains}
    per_subdomain = {s: LevelScore(sub_pts[s], sub_max[s]) for s in schema.subdomains}
    return AggregateReport(
        entity_id=final.entity_id,
        overall=sum(v.points for v in per_domain.values()),
        overall_max=sum(v.max for v in per_domain.values()),
        per_domain=per_domain,
        per_subdomain=per_subdomain,
    )


def new_information_split(final: ScoreSheet, schema: IndicatorSchema) -> tuple[int, int]:
    """(points backed by pre-existing information, points from newly disclosed information)."""
    earned = _earned(final, schema)
    new = sum(p for i, p in earned.items() if p and i in final.new_information)
    old = sum(p for i, p in earned.items() if p and i not in final.new_information)
    return old, new


def simple_matching(a: ScoreSheet, b: ScoreSheet, ids: Optional[Iterable[str]] = None) -> Optional[Fraction]:
    """Fraction of commonly scored indicators with identical scores; ``None`` if none in common."""
    common = set(a.scores) & set(b.scores)
    if ids is not None:
        common &= set(ids)
    if not common:
        return None
    return Fraction(sum(a.scores[i] == b.scores[i] for i in common), len(common))


def smc_matrix(
    finals: Sequence[ScoreSheet],
    schema: Optional[IndicatorSchema] = None,
    domain: Optional[str] = None,
) -> dict[str, dict[str, Optional[Fraction]]]:
    """Symmetric entity x entity simple-matching matrix, keyed by sorted entity id.

    With ``domain`` set, only that domain's indicators (from ``schema``) count.
    """
    if len(finals) < 2:
        raise ValueError("need at least two score sheets")
    by_entity = {s.entity_id: s for s in finals}
    if len(by_entity) != len(finals):
        raise ValueError("duplicate entity among score sheets")
    ids = None
    if domain is not None:
        if schema is None:
            raise ValueError("restricting to a domain needs the schema")
        ids = [ind.id for ind in schema.indicators if ind.domain == domain]
        if not ids:
            raise ValueError(f"schema {schema.name!r} has no domain {domain!r}")
    entities = sorted(by_entity)
    matrix: dict[str, dict[str, Optional[Fraction]]] = {e: {} for e in entities}
    for i, e in enumerate(entities):
        matrix[e][e] = Fraction(1)
        for f in entities[i + 1 :]:
            value = simple_matching(by_entity[e], by_entity[f], ids)
            matrix[e][f] = matrix[f][e] = value
    return matrix


def median(values: Sequence) -> Fraction:
    """Median with the midpoint rule for even counts."""
    ordered = sorted(Fraction(v) for v in values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of empty sequence")
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def mean(values: Sequence) -> Fraction:
    if not values:
        raise ValueError("mean of empty sequence")
    return sum((Fraction(v) for v in values), Fraction(0)) / len(values)


@dataclass(frozen=True)
class CohortStat:
    n: int
    mean: Fraction
    median: Fraction


def group_compare(
    reports: Mapping[str, AggregateReport],
    grouping: Mapping[str, str],
) -> dict[str, dict[str, CohortStat]]:
    """Mean and median points per cohort at every aggregation level.

    Returns cohort -> level -> stats, cohorts in sorted order.
    """
    unassigned = sorted(set(reports) - set(grouping))
    if unassigned:
        raise ValueError(f"entity {unassigned[0]!r} has no cohort")
    members: dict[str, list[str]] = {c: [] for c in sorted(set(grouping.values()))}
    for entity, cohort in grouping.items():
        if entity in reports:
            members[cohort].append(entity)
    out: dict[str, dict[str, CohortStat]] = {}
    for cohort, entities in members.items():
        if not entities:
            raise ValueError(f"cohort {cohort!r} has no scored entities")
        levels: dict[str, list[int]] = defaultdict(list)
        for e in sorted(entities):
            for level, pts in reports[e].levels().items():
                levels[level].append(pts)
        out[cohort] = {
            level: CohortStat(len(vals), mean(vals), median(vals)) for level, vals in levels.items()
        }
    return out


@dataclass(frozen=True)
class LongitudinalDiff:
    per_entity: dict[str, dict[str, int]]
    mean: dict[str, Fraction]


def longitudinal_diff(
    old: Mapping[str, AggregateReport], new: Mapping[str, AggregateReport]
) -> LongitudinalDiff:
    """new - old points per entity and level, over entities present in both editions."""
    both = sorted(set(old) & set(new))
    if not both:
        raise ValueError("no entity appears in both editions")
    per_entity: dict[str, dict[str, int]] = {}
    for e in both:
        before, after = old[e].levels(), new[e].levels()
        per_entity[e] = {lvl: after[lvl] - before[lvl] for lvl in after if lvl in before}
    levels = list(per_entity[both[0]])
    means = {
        lvl: mean([d[lvl] for d in per_entity.values() if lvl in d])
        for lvl in levels
    }
    return LongitudinalDiff(per_entity, means)
