import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmeco.metrics import RankedList, ndcg, reciprocal_rank, rouge_2, token_f1
from fmeco.metrics.text import bigrams, tokenize

words = st.lists(st.sampled_from(["a", "b", "c", "the", "cat", "Sat"]), max_size=8).map(" ".join)


def test_tokenize_lowercases_and_splits_on_whitespace():
    assert tokenize("The  Cat\tsat\n") == ["the", "cat", "sat"]
    assert bigrams(["a", "b", "c"]) == [("a", "b"), ("b", "c")]


def test_token_f1_examples():
    assert token_f1("a b c", "a b c") == 1.0
    assert token_f1("a b", "c d") == 0.0
    assert token_f1("a b c", "a b d") == 2 / 3


def test_rouge_2_examples():
    assert rouge_2("the cat sat", "the cat sat") == 1.0
    assert rouge_2("the cat sat", "sat cat the") == 0.0
    assert rouge_2("the cat sat", "the cat ran") == 0.5


def test_empty_texts():
    assert token_f1("", "") == 1.0
    assert token_f1("a", "") == 0.0


@given(words, words)
def test_overlap_metrics_symmetric_and_bounded(a, b):
    for f in (token_f1, rouge_2):
        assert f(a, b) == f(b, a)
        assert 0.0 <= f(a, b) <= 1.0


@given(words, words)
def test_token_f1_is_one_iff_multisets_match(a, b):
    same = sorted(tokenize(a)) == sorted(tokenize(b))
    assert (token_f1(a, b) == 1.0) == same


@given(words, words)
def test_rouge_2_is_one_iff_bigram_multisets_match(a, b):
    same = sorted(bigrams(tokenize(a))) == sorted(bigrams(tokenize(b)))
    assert (rouge_2(a, b) == 1.0) == same


def test_reciprocal_rank_examples():
    assert reciprocal_rank(RankedList("q", ("d1", "d2"), {"d1": 1})) == 1.0
    assert reciprocal_rank(RankedList("q", ("d1", "d2"), {"d3": 1})) == 0.0
    assert reciprocal_rank(RankedList("q", ("d1", "d2", "d3"), {"d3": 2})) == 1 / 3
    deep = RankedList("q", tuple(f"d{i}" for i in range(12)), {"d11": 1})
    assert reciprocal_rank(deep, cutoff=10) == 0.0
    assert reciprocal_rank(deep, cutoff=12) == 1 / 12


def test_ndcg_examples():
    assert ndcg(RankedList("q", ("a", "b", "c"), {"a": 3, "b": 2, "c": 1})) == 1.0
    assert ndcg(RankedList("q", ("a", "b"), {"a": 0, "b": 0})) == 0.0
    worst_first = RankedList("q", ("b", "a"), {"a": 1, "b": 0})
    assert ndcg(worst_first) == pytest.approx(1 / math.log2(3), abs=1e-15)
    assert ndcg(worst_first) == pytest.approx(0.6309, abs=1e-4)


def test_ndcg_linear_gain_flag():
    r = RankedList("q", ("b", "a"), {"a": 2, "b": 1})
    exp = (1 + 3 / math.log2(3)) / (3 + 1 / math.log2(3))
    lin = (1 + 2 / math.log2(3)) / (2 + 1 / math.log2(3))
    assert ndcg(r) == pytest.approx(exp)
    assert ndcg(r, exponential_gain=False) == pytest.approx(lin)


def test_ndcg_ideal_includes_unretrieved_judged_documents():
    r = RankedList("q", ("a",), {"a": 1, "z": 1})
    assert ndcg(r) == pytest.approx(1 / (1 + 1 / math.log2(3)))


def test_rejects_bad_cutoff_and_duplicates():
    with pytest.raises(ValueError):
        ndcg(RankedList("q", ("a",), {}), cutoff=0)
    with pytest.raises(ValueError):
        RankedList("q", ("a", "a"), {})
    with pytest.raises(ValueError):
        RankedList("q", ("a",), {"a": -1})


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12), st.randoms())
def test_ndcg_one_for_any_ideal_order(grades, rnd):
    docs = [f"d{i}" for i in range(len(grades))]
    rel = dict(zip(docs, grades))
    # Any ordering sorted by grade is ideal, whatever the order among equal grades.
    rnd.shuffle(docs)
    ideal = sorted(docs, key=lambda d: -rel[d])
    expected = 0.0 if not any(grades) else 1.0
    assert ndcg(RankedList("q", tuple(ideal), rel), cutoff=12) == pytest.approx(expected, abs=1e-12)
    assert 0.0 <= ndcg(RankedList("q", tuple(docs), rel), cutoff=12) <= 1.0 + 1e-12
