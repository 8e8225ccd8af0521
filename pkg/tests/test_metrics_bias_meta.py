import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmeco.metrics import (
    GenerationStats,
    association_bias,
    head_to_head_win_rates,
    metric_correlation,
    pearson,
    representation_bias,
    spearman,
    toxicity_rate,
)

from .oracles import win_rates_by_enumeration

counts = st.dictionaries(st.sampled_from(["f", "m", "n"]), st.integers(0, 50), min_size=1)


def test_representation_bias_examples():
    assert representation_bias(GenerationStats({"f": 5, "m": 5})) == 0.0
    assert representation_bias(GenerationStats({"f": 10, "m": 0})) == 0.5
    assert representation_bias(GenerationStats({"f": 3, "m": 1}), {"f": 0.75, "m": 0.25}) == 0.0
    assert representation_bias(GenerationStats({"f": 0, "m": 0})) is None


def test_association_bias_examples():
    even = GenerationStats({"f": 1, "m": 1}, {"doctor": {"f": 2, "m": 2}, "nurse": {"f": 4, "m": 4}})
    assert association_bias(even) == 0.0
    one_sided = GenerationStats({"f": 1, "m": 1}, {"doctor": {"f": 0, "m": 6}})
    assert association_bias(one_sided) == 0.5
    skip_empty = GenerationStats({"f": 1, "m": 1}, {"doctor": {"f": 0, "m": 6}, "x": {"f": 0, "m": 0}})
    assert association_bias(skip_empty) == 0.5
    assert association_bias(GenerationStats({"f": 1, "m": 1}, {})) is None


def test_reference_must_be_a_distribution():
    with pytest.raises(ValueError):
        representation_bias(GenerationStats({"f": 1}), {"f": 0.5})


@given(counts)
def test_bias_bounded_and_zero_iff_uniform(c):
    value = representation_bias(GenerationStats(c))
    if sum(c.values()) == 0:
        assert value is None
        return
    assert 0.0 <= value <= 1.0
    uniform = len(set(c.values())) == 1
    assert (value == pytest.approx(0.0, abs=1e-12)) == uniform


def test_toxicity_rate_examples():
    assert toxicity_rate([0.0, 0.0]) == 0.0
    assert toxicity_rate([1.0, 1.0]) == 1.0
    assert toxicity_rate([0.2, 0.6, 0.5], 0.5) == 2 / 3
    with pytest.raises(ValueError):
        toxicity_rate([])
    with pytest.raises(ValueError):
        toxicity_rate([1.2])


def test_win_rate_examples():
    scores = {"a": {"s1": 0.9, "s2": 0.8}, "b": {"s1": 0.1, "s2": 0.2}, "c": {"s1": 0.5, "s2": 0.5}}
    assert head_to_head_win_rates(scores)["a"] == 1.0
    assert head_to_head_win_rates(scores, higher_is_better=False)["a"] == 0.0
    same = {"a": {"s": 1.0}, "b": {"s": 1.0}}
    assert head_to_head_win_rates(same) == {"a": 0.5, "b": 0.5}
    with pytest.raises(ValueError):
        head_to_head_win_rates({"a": {"s": 1}})


def test_win_rate_hand_table_by_enumeration():
    table = {"a": {"s1": 3, "s2": 1}, "b": {"s1": 2, "s2": 2}, "c": {"s1": 3, "s2": 0}}
    assert head_to_head_win_rates(table, exact=True) == win_rates_by_enumeration(table)
    assert head_to_head_win_rates(table, exact=True) == {
        "a": Fraction(5, 8), "b": Fraction(2, 4), "c": Fraction(3, 8)}


def test_win_rate_skips_missing_and_reports_none():
    table = {"a": {"s1": 1.0}, "b": {"s2": 1.0}, "c": {"s1": 0.0, "s2": 2.0}}
    rates = head_to_head_win_rates(table)
    assert rates == {"a": 1.0, "b": 0.0, "c": 0.5}
    lonely = {"a": {"s1": 1.0}, "b": {"s2": 1.0}}
    assert head_to_head_win_rates(lonely) == {"a": None, "b": None}


tables = st.integers(2, 5).flatmap(lambda m: st.integers(1, 4).flatmap(lambda s: st.lists(
    st.lists(st.integers(0, 3), min_size=s, max_size=s), min_size=m, max_size=m)))


@given(tables, st.booleans())
def test_win_rates_mean_half_and_match_enumeration(rows, higher):
    table = {f"m{i}": {f"s{j}": v for j, v in enumerate(r)} for i, r in enumerate(rows)}
    rates = head_to_head_win_rates(table, higher, exact=True)
    assert rates == win_rates_by_enumeration(table, higher)
    assert sum(rates.values()) / len(rates) == Fraction(1, 2)


def test_pearson_examples():
    a = [1.0, 2.0, 4.0, 7.0]
    assert pearson(a, [2 * x + 3 for x in a]) == pytest.approx(1.0)
    assert pearson(a, [-x for x in a]) == pytest.approx(-1.0)
    # By hand: sum(dx*dy) = 3 and sum(dx^2) = sum(dy^2) = 5, so r = 3/5.
    assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    with pytest.raises(ValueError):
        pearson([1], [1])


def test_spearman_uses_ranks():
    assert spearman([1, 2, 3, 4], [1, 4, 9, 100]) == pytest.approx(1.0)
    assert spearman([1, 2, 2, 3], [1, 2, 2, 3]) == pytest.approx(1.0)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=8),
       st.lists(st.floats(-100, 100), min_size=3, max_size=8),
       st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_affine_invariance(x, y, scale, shift):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    r = pearson(x, y)
    r2 = pearson([scale * v + shift for v in x], y)
    if r is None or r2 is None or abs(max(x) - min(x)) < 1e-3:
        return
    assert r2 == pytest.approx(r, abs=1e-6)


def test_metric_correlation_per_scenario_and_summary():
    acc = {"s1": {"a": 0.9, "b": 0.5, "c": 0.1}, "s2": {"a": 0.1, "b": 0.1, "c": 0.1}}
    cal = {"s1": {"a": 0.1, "b": 0.3, "c": 0.5}, "s2": {"a": 0.2, "b": 0.3, "c": 0.4}}
    per, mean = metric_correlation(acc, cal)
    assert per["s1"] == pytest.approx(-1.0)
    assert per["s2"] is None
    assert mean == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        metric_correlation(acc, cal, "kendall")
