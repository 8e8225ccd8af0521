"""Flag scaling curves whose performance jumps off a near-random plateau.

The rule is a two-threshold heuristic with no default thresholds: a curve is
emergent when it starts with at least one point within ``near_random_tol`` of
chance and, after that plateau ends, some point beats chance by at least
``jump_min``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class ScalingCurve:
    points: tuple[tuple[float, float], ...]
    random_baseline: float

    def __post_init__(self):
        pts = tuple((float(s), float(p)) for s, p in self.points)
        if len(pts) < 2:
            raise ValueError("a scaling curve needs at least two points")
        for s, p in pts:
            if not (math.isfinite(s) and math.isfinite(p)):
                raise ValueError("scale and performance must be finite")
            if s <= 0:
                raise ValueError(f"scale {s!r} must be positive")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("scales must be strictly increasing")
        if not math.isfinite(self.random_baseline):
            raise ValueError("random_baseline must be finite")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class EmergenceVerdict:
    emergent: bool
    threshold_scale: Optional[float] = None

    @property
    def label(self) -> str:
        return "emergent" if self.emergent else "not_emergent"


def detect_emergence(curve: ScalingCurve, near_random_tol: float, jump_min: float) -> EmergenceVerdict:
    if near_random_tol < 0:
        raise ValueError("near_random_tol must be >= 0")
    if jump_min <= near_random_tol:
        raise ValueError("jump_min must exceed near_random_tol")
    base = curve.random_baseline
    plateau = 0
    for _, perf in curve.points:
        if abs(perf - base) > near_random_tol:
            break
        plateau += 1
    if plateau == 0:
        return EmergenceVerdict(False)
    for scale, perf in curve.points[plateau:]:
        if perf - base >= jump_min:
            return EmergenceVerdict(True, scale)
    return EmergenceVerdict(False)
