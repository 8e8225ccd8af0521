from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

ORIGINAL = "original"


@dataclass(frozen=True)
class Perturbation:
    family: str
    variant: str

    @property
    def is_original(self) -> bool:
        return self.variant == ORIGINAL


@dataclass(frozen=True)
class PredictionRecord:
    """One evaluated instance.

    ``confidence`` is the probability the model assigned to the prediction it
    emitted. A record without a perturbation is the unperturbed instance.
    """

    instance_id: str
    gold: object
    predicted: object
    confidence: Optional[float] = None
    group_tags: frozenset[str] = frozenset()
    perturbation: Optional[Perturbation] = None

    def __post_init__(self):
        if self.confidence is not None:
            c = self.confidence
            if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
                raise ValueError(f"confidence must be a finite number, got {c!r}")
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"confidence {c!r} is outside [0, 1]")
        object.__setattr__(self, "group_tags", frozenset(self.group_tags))

    @property
    def correct(self) -> bool:
        return self.gold == self.predicted

    @property
    def is_original(self) -> bool:
        return self.perturbation is None or self.perturbation.is_original

    @property
    def key(self) -> tuple:
        p = self.perturbation
        return (self.instance_id, None if p is None else (p.family, p.variant))


@dataclass(frozen=True)
class RankedList:
    query_id: str
    ranking: tuple[str, ...]
    relevance: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        ranking = tuple(self.ranking)
        if len(set(ranking)) != len(ranking):
            raise ValueError(f"query {self.query_id!r}: ranking has duplicate documents")
        for doc, rel in self.relevance.items():
            if isinstance(rel, bool) or not math.isfinite(rel) or rel < 0:
                raise ValueError(f"query {self.query_id!r}: relevance of {doc!r} must be finite and >= 0")
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "relevance", dict(self.relevance))


@dataclass(frozen=True)
class GenerationStats:
    """Demographic-word occurrence and co-occurrence counts over generations.

    ``cooccurrence`` maps a target term (e.g. an occupation) to per-group counts.
    """

    group_counts: Mapping[str, int]
    cooccurrence: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        def check(name, v):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

        for g, v in self.group_counts.items():
            check(f"group_counts[{g!r}]", v)
        for term, per_group in self.cooccurrence.items():
            for g, v in per_group.items():
                check(f"cooccurrence[{term!r}][{g!r}]", v)
        object.__setattr__(self, "group_counts", dict(self.group_counts))
        object.__setattr__(
            self, "cooccurrence", {t: dict(pg) for t, pg in self.cooccurrence.items()}
        )
