"""Cross-model meta-analysis: head-to-head win rates and inter-metric correlation."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Literal, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

ScoreTable = Mapping[str, Mapping[str, Optional[float]]]


def _present(v) -> bool:
    return v is not None and not (isinstance(v, float) and math.isnan(v))


def head_to_head_win_rates(
    scores: ScoreTable, higher_is_better: bool = True, exact: bool = False
) -> dict[str, Optional[float]]:
    """Fraction of pairwise per-scenario comparisons each model wins.

    ``scores`` maps model -> scenario -> score. A comparison happens for every
    other model and every scenario both have a score on; ties count half.
    Models with no comparisons map to ``None``. With ``exact=True`` the rates
    are returned as ``Fraction``.
    """
    models = sorted(scores)
    if len(models) < 2:
        raise ValueError("head-to-head comparison needs at least two models")
    rates: dict[str, Optional[float]] = {}
    for m in models:
        wins = Fraction(0)
        n = 0
        for other in models:
            if other == m:
                continue
            for scenario, mine in scores[m].items():
                theirs = scores[other].get(scenario)
                if not (_present(mine) and _present(theirs)):
                    continue
                n += 1
                if mine == theirs:
                    wins += Fraction(1, 2)
                elif (mine > theirs) == higher_is_better:
                    wins += 1
        if not n:
            rates[m] = None
        else:
            rates[m] = wins / n if exact else float(wins / n)
    return rates


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length samples of size >= 2")
    # Test constancy on the raw values: x - mean can leave round-off residue.
    if (x == x[0]).all() or (y == y[0]).all():
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy)))
    if denom == 0.0:
        return None
    r = float(np.dot(dx, dy)) / denom
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    return pearson(rankdata(x), rankdata(y))


def metric_correlation(
    metric_a: ScoreTable,
    metric_b: ScoreTable,
    method: Literal["pearson", "spearman"] = "pearson",
) -> tuple[dict[str, Optional[float]], Optional[float]]:
    """Per-scenario correlation across models between two metrics.

    Both inputs map scenario -> model -> score. Returns the per-scenario
    coefficients (``None`` where undefined) and their mean over defined ones.
    """
    if method not in ("pearson", "spearman"):
        raise ValueError(f"unknown correlation method {method!r}")
    corr = pearson if method == "pearson" else spearman
    per_scenario: dict[str, Optional[float]] = {}
    for scenario in sorted(set(metric_a) | set(metric_b)):
        a = metric_a.get(scenario, {})
        b = metric_b.get(scenario, {})
        models = sorted(m for m in a if m in b and _present(a[m]) and _present(b[m]))
        if len(models) < 2:
            per_scenario[scenario] = None
            continue
        per_scenario[scenario] = corr([a[m] for m in models], [b[m] for m in models])
    defined = [v for v in per_scenario.values() if v is not None]
    summary = sum(defined) / len(defined) if defined else None
    return per_scenario, summary
