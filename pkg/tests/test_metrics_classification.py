import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmeco.metrics import (
    PredictionRecord,
    accuracy,
    coverage_accuracy_auc,
    coverage_accuracy_curve,
    ece,
    performance_disparities,
    selective_accuracy,
    worst_case_accuracy,
)
from fmeco.metrics.records import Perturbation


def recs(confs, correct, tags=None):
    out = []
    for i, (c, ok) in enumerate(zip(confs, correct)):
        out.append(PredictionRecord(f"x{i}", 1, 1 if ok else 0, c, frozenset(tags[i]) if tags else frozenset()))
    return out


logs = st.lists(
    st.tuples(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]) | st.floats(0, 1), st.booleans()),
    min_size=1, max_size=40,
).map(lambda xs: recs([c for c, _ in xs], [ok for _, ok in xs]))


def test_accuracy_examples():
    assert accuracy(recs([None] * 3, [1, 1, 1])) == 1.0
    assert accuracy(recs([None] * 3, [0, 0, 0])) == 0.0
    assert accuracy(recs([None] * 4, [1, 1, 1, 0])) == 0.75
    with pytest.raises(ValueError):
        accuracy([])


def test_confidence_bounds_enforced():
    with pytest.raises(ValueError):
        PredictionRecord("x", 1, 1, 1.5)
    with pytest.raises(ValueError):
        PredictionRecord("x", 1, 1, float("nan"))


def test_ece_examples():
    assert ece(recs([1.0] * 10, [1] * 10)) == 0.0
    assert ece(recs([1.0] * 10, [0] * 10)) == 1.0
    hand = recs([0.6, 0.6, 0.9, 0.9], [1, 0, 1, 1])
    # 0.6 - 0.5 is not exactly 0.1 in binary floating point.
    assert ece(hand, bins=2) == 0.1


def test_ece_errors():
    with pytest.raises(ValueError, match="confidence"):
        ece([PredictionRecord("x", 1, 1)] * 10)
    with pytest.raises(ValueError, match="at least"):
        ece(recs([0.5] * 3, [1] * 3), bins=10)
    with pytest.raises(ValueError):
        ece(recs([0.5] * 3, [1] * 3), bins=0)


def test_ece_bin_sizes_put_remainder_in_lowest_bins():
    # 5 records in 2 bins: the low bin holds 3 (conf 0.1), the high bin 2 (conf 0.9).
    r = recs([0.1, 0.1, 0.1, 0.9, 0.9], [0, 0, 0, 1, 1])
    assert ece(r, bins=2) == pytest.approx(3 / 5 * 0.1 + 2 / 5 * 0.1)


def _ece_oracle(confs, correct, bins):
    order = sorted(range(len(confs)), key=lambda i: (confs[i], correct[i]))
    n = len(confs)
    sizes = [n // bins + (1 if b < n % bins else 0) for b in range(bins)]
    total, start = 0.0, 0
    for size in sizes:
        idx = order[start : start + size]
        start += size
        total += size / n * abs(sum(confs[i] for i in idx) / size - sum(correct[i] for i in idx) / size)
    return total


@given(logs, st.integers(1, 10))
def test_ece_matches_oracle_and_bounds(r, bins):
    if len(r) < bins:
        return
    confs = [x.confidence for x in r]
    correct = [int(x.correct) for x in r]
    value = ece(r, bins)
    assert 0.0 <= value <= 1.0
    assert value == pytest.approx(_ece_oracle(confs, correct, bins), abs=1e-12)


@given(logs, st.randoms())
def test_ece_permutation_invariant(r, rnd):
    bins = min(len(r), 5)
    shuffled = list(r)
    rnd.shuffle(shuffled)
    assert ece(shuffled, bins) == ece(r, bins)


def test_selective_accuracy_examples():
    r = recs([0.9, 0.8, 0.1], [1, 1, 0])
    assert selective_accuracy(r, 2 / 3) == 1.0
    ties = recs([0.5] * 4, [1, 1, 0, 0])
    assert selective_accuracy(ties, 0.5) == 1.0
    with pytest.raises(ValueError):
        selective_accuracy(r, 0.0)
    with pytest.raises(ValueError):
        selective_accuracy(r, 1.01)
    with pytest.raises(ValueError):
        selective_accuracy([], 0.5)


def test_selective_accuracy_keeps_ceiling_of_coverage():
    r = recs([0.9, 0.8, 0.7, 0.6], [1, 0, 0, 0])
    assert selective_accuracy(r, 0.1) == 1.0  # ceil(0.4) = 1
    assert selective_accuracy(r, 0.26) == 0.5  # ceil(1.04) = 2


@given(logs)
def test_full_coverage_is_accuracy(r):
    assert selective_accuracy(r, 1.0) == accuracy(r)


@given(logs)
def test_curve_agrees_with_selective_accuracy(r):
    n = len(r)
    curve = coverage_accuracy_curve(r)
    assert [c for c, _ in curve] == [i / n for i in range(1, n + 1)]
    for c, acc in curve:
        assert acc == pytest.approx(selective_accuracy(r, c), abs=1e-12)
    assert coverage_accuracy_auc(r) == pytest.approx(sum(a for _, a in curve) / n)


def test_auc_examples():
    assert coverage_accuracy_auc(recs([0.3, 0.6], [1, 1])) == 1.0
    assert coverage_accuracy_auc(recs([0.3, 0.6], [0, 0])) == 0.0
    assert coverage_accuracy_auc(recs([0.9, 0.1], [1, 0])) == 0.75


def _variant(inst, ok, family=None):
    pert = Perturbation(family, "v") if family else None
    return PredictionRecord(inst, 1, 1 if ok else 0, None, frozenset(), pert)


def test_worst_case_accuracy_examples():
    allgood = [_variant("a", 1), _variant("a", 1, "typo"), _variant("b", 1)]
    assert worst_case_accuracy(allgood) == 1.0
    mixed = [_variant("a", 1), _variant("a", 1, "typo"), _variant("b", 1), _variant("b", 0, "typo")]
    assert worst_case_accuracy(mixed) == 0.5
    with pytest.raises(ValueError, match="no original"):
        worst_case_accuracy([_variant("a", 1, "typo")])


def test_explicit_original_variant_counts_as_original():
    r = PredictionRecord("a", 1, 1, None, frozenset(), Perturbation("typo", "original"))
    assert r.is_original
    assert worst_case_accuracy([r]) == 1.0


@given(st.lists(st.tuples(st.booleans(), st.lists(st.booleans(), max_size=3)), min_size=1, max_size=15))
def test_worst_case_never_exceeds_original_accuracy(groups):
    records = []
    for i, (orig, variants) in enumerate(groups):
        records.append(_variant(f"i{i}", orig))
        records += [_variant(f"i{i}", ok, f"f{j}") for j, ok in enumerate(variants)]
    originals = [r for r in records if r.is_original]
    assert worst_case_accuracy(records) <= accuracy(originals)


def test_performance_disparities():
    r = recs([None] * 4, [1, 1, 0, 0], [["a"], ["a", "x"], ["b", "x"], ["b"]])
    assert performance_disparities(r) == {"a": 1.0, "b": 0.0, "x": 0.5}
    single = recs([None] * 3, [1, 0, 1], [["g"]] * 3)
    assert performance_disparities(single) == {"g": accuracy(single)}


def test_calibrated_synthetic_log_has_small_ece():
    rng = np.random.default_rng(3)
    records = []
    for level in np.linspace(0.05, 0.95, 10):
        # Exactly round(level * 1000) correct out of 1000 at confidence `level`.
        hits = int(round(level * 1000))
        flags = [1] * hits + [0] * (1000 - hits)
        rng.shuffle(flags)
        records += recs([float(level)] * 1000, flags)
    assert ece(records) <= 0.01
