"""Indicator schemas and per-rater score sheets for composite indexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

# Marker for an indicator that does not apply to an entity (e.g. no user
# interface to assess). It is removed from that entity's maximum.
NOT_APPLICABLE = "NA"


@dataclass(frozen=True)
class Indicator:
    id: str
    name: str
    domain: str
    subdomain: str
    scale_max: int = 1

    def __post_init__(self):
        if isinstance(self.scale_max, bool) or not isinstance(self.scale_max, int) or self.scale_max < 1:
            raise ValueError(f"indicator {self.id!r}: scale_max must be an integer >= 1")

    @property
    def binary(self) -> bool:
        return self.scale_max == 1


@dataclass(frozen=True)
class IndicatorSchema:
    name: str
    indicators: tuple[Indicator, ...]
    default_zero: bool = False

    def __post_init__(self):
        inds = tuple(self.indicators)
        if not inds:
            raise ValueError(f"schema {self.name!r} has no indicators")
        seen: set[str] = set()
        sub_to_domain: dict[str, str] = {}
        for ind in inds:
            if ind.id in seen:
                raise ValueError(f"schema {self.name!r}: duplicate indicator id {ind.id!r}")
            seen.add(ind.id)
            owner = sub_to_domain.setdefault(ind.subdomain, ind.domain)
            if owner != ind.domain:
                raise ValueError(
                    f"schema {self.name!r}: subdomain {ind.subdomain!r} appears under "
                    f"domains {owner!r} and {ind.domain!r}"
                )
        object.__setattr__(self, "indicators", inds)

    def __getitem__(self, indicator_id: str) -> Indicator:
        return self._by_id[indicator_id]

    def __contains__(self, indicator_id: str) -> bool:
        return indicator_id in self._by_id

    def __len__(self) -> int:
        return len(self.indicators)

    @cached_property
    def _by_id(self) -> dict[str, Indicator]:
        return {ind.id: ind for ind in self.indicators}

    @property
    def ids(self) -> list[str]:
        return [ind.id for ind in self.indicators]

    @property
    def domains(self) -> list[str]:
        return list(dict.fromkeys(ind.domain for ind in self.indicators))

    @property
    def subdomains(self) -> list[str]:
        return list(dict.fromkeys(ind.subdomain for ind in self.indicators))

    def domain_of(self, subdomain: str) -> str:
        for ind in self.indicators:
            if ind.subdomain == subdomain:
                return ind.domain
        raise KeyError(subdomain)

    def max_points(self) -> int:
        return sum(ind.scale_max for ind in self.indicators)


@dataclass(frozen=True)
class ScoreSheet:
    """One rater's scores for one entity (a developer and its flagship model)."""

    rater_id: str
    entity_id: str
    scores: Mapping[str, int]
    sources: Mapping[str, str] = field(default_factory=dict)
    justifications: Mapping[str, str] = field(default_factory=dict)
    new_information: frozenset[str] = frozenset()
    not_applicable: frozenset[str] = frozenset()
    schema_name: Optional[str] = None

    def __post_init__(self):
        for iid, s in self.scores.items():
            if isinstance(s, bool) or not isinstance(s, int):
                raise ValueError(f"indicator {iid!r}: score must be an integer, got {s!r}")
        object.__setattr__(self, "scores", dict(self.scores))
        object.__setattr__(self, "sources", dict(self.sources))
        object.__setattr__(self, "justifications", dict(self.justifications))
        object.__setattr__(self, "new_information", frozenset(self.new_information))
        object.__setattr__(self, "not_applicable", frozenset(self.not_applicable))
        stray = sorted(self.new_information - set(self.scores))
        if stray:
            raise ValueError(f"indicator {stray[0]!r} flagged as new information but not scored")
        both = sorted(self.not_applicable & set(self.scores))
        if both:
            raise ValueError(f"indicator {both[0]!r} is both scored and marked not applicable")

    def entry(self, indicator_id: str):
        """Score, ``NOT_APPLICABLE`` or ``None`` when unscored."""
        if indicator_id in self.scores:
            return self.scores[indicator_id]
        if indicator_id in self.not_applicable:
            return NOT_APPLICABLE
        return None

    def check(self, schema: IndicatorSchema) -> None:
        """Raise ``ValueError`` naming the first indicator that violates ``schema``."""
        for iid in sorted(set(self.scores) | self.not_applicable):
            if iid not in schema:
                raise ValueError(f"unknown indicator id {iid!r} (not in schema {schema.name!r})")
        for iid, s in self.scores.items():
            top = schema[iid].scale_max
            if not 0 <= s <= top:
                raise ValueError(f"indicator {iid!r}: score {s} outside scale 0..{top}")


FMTI_TAXONOMY: dict[str, list[tuple[str, int]]] = {
    "upstream": [
        ("Data", 10),
        ("Data Labor", 7),
        ("Data Access", 2),
        ("Compute", 7),
        ("Methods", 4),
        ("Data Mitigations", 2),
    ],
    "model": [
        ("Model Basics", 6),
        ("Model Access", 3),
        ("Capabilities", 5),
        ("Limitations", 3),
        ("Risks", 7),
        ("Model Mitigations", 5),
        ("Trustworthiness", 2),
        ("Inference", 2),
    ],
    "downstream": [
        ("Distribution", 7),
        ("Usage Policy", 5),
        ("Model Behavior Policy", 3),
        ("User Interface", 2),
        ("User Data Protection", 3),
        ("Model Updates", 3),
        ("Feedback", 3),
        ("Impact", 7),
        ("Downstream Documentation", 2),
    ],
}

COMPLIANCE_REQUIREMENTS: dict[str, list[str]] = {
    "data": ["Data sources", "Data governance", "Copyrighted data"],
    "compute": ["Compute", "Energy"],
    "model": ["Capabilities and limitations", "Risks and mitigations", "Evaluations", "Testing"],
    "deployment": ["Machine-generated content", "Member states", "Downstream documentation"],
}


def _slug(text: str) -> str:
    return "-".join(text.lower().replace("/", " ").split())


def fmti_schema() -> IndicatorSchema:
    """The 100 binary transparency indicators across 3 domains and 23 subdomains."""
    indicators = []
    for domain, subdomains in FMTI_TAXONOMY.items():
        for sub, count in subdomains:
            for n in range(1, count + 1):
                indicators.append(
                    Indicator(f"{_slug(sub)}-{n:02d}", f"{sub} indicator {n}", domain, sub, 1)
                )
    return IndicatorSchema("fmti", tuple(indicators))


def compliance_schema() -> IndicatorSchema:
    """12 requirements, each scored 0 (worst) to 4 (best)."""
    indicators = [
        Indicator(_slug(req), req, category, category, 4)
        for category, reqs in COMPLIANCE_REQUIREMENTS.items()
        for req in reqs
    ]
    return IndicatorSchema("compliance", tuple(indicators))
