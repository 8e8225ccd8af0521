"""Exact Poisson-Binomial distribution utilities.

The PMF over the number of successes among independent, non-identical
Bernoulli trials is built by folding one trial at a time into the running
distribution (coefficients of the generating function prod(1 - p + p*x)).
This is O(k^2) and exact to double precision for k up to ~1e3.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

# Negative mass smaller than this in magnitude is treated as convolution round-off.
ROUNDOFF_TOL = 1e-15


def validate_rates(rates: Sequence[float]) -> np.ndarray:
    """Return ``rates`` as a float array, rejecting non-finite or out-of-range values."""
    arr = np.asarray(list(rates), dtype=float)
    if arr.ndim != 1:
        raise ValueError("rates must be a flat sequence of probabilities")
    for i, p in enumerate(arr):
        if not math.isfinite(p):
            raise ValueError(f"rate[{i}] is not finite: {p!r}")
        if p < 0.0 or p > 1.0:
            raise ValueError(f"rate[{i}] = {p!r} is outside [0, 1]")
    return arr


def _clean(mass: np.ndarray) -> np.ndarray:
    tiny_negative = (mass < 0) & (mass > -ROUNDOFF_TOL)
    if tiny_negative.any():
        mass = np.where(tiny_negative, 0.0, mass)
        mass = mass / mass.sum()
    return mass


def poisson_binomial_pmf(rates: Sequence[float]) -> np.ndarray:
    """PMF of the number of successes among independent Bernoulli(rates[j]) trials.

    Returns an array of length ``len(rates) + 1`` where entry ``t`` is the
    probability of exactly ``t`` successes. An empty ``rates`` gives ``[1.0]``.
    """
    # Sorting makes the floating-point result independent of input ordering.
    probs = np.sort(validate_rates(rates))
    mass = np.zeros(len(probs) + 1)
    mass[0] = 1.0
    for n, p in enumerate(probs, start=1):
        # Fold in one trial: new[t] = old[t](1-p) + old[t-1]p, in place from the top.
        mass[1 : n + 1] = mass[1 : n + 1] * (1.0 - p) + mass[0:n] * p
        mass[0] *= 1.0 - p
    return _clean(mass)


def validate_pmf(mass: Sequence[float], atol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(list(mass), dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("pmf must be a non-empty flat sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("pmf entries must be finite")
    if np.any(arr < 0):
        raise ValueError("pmf entries must be non-negative")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"pmf sums to {arr.sum()!r}, not 1")
    return arr


def pmf_mean(mass: Sequence[float]) -> float:
    """Expected value sum_t t * mass[t]."""
    arr = validate_pmf(mass)
    return float(np.dot(np.arange(arr.size), arr))
