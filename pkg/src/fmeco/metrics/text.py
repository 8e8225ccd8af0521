"""Token-overlap metrics for generated text.

Normalization is lowercasing plus whitespace splitting, nothing else, so any
other implementation can reproduce scores exactly.
"""

from __future__ import annotations

from collections import Counter


def tokenize(text: str) -> list[str]:
    return str(text).lower().split()


def bigrams(tokens: list[str]) -> list[tuple[str, str]]:
    return list(zip(tokens, tokens[1:]))


def _overlap_f1(gold: Counter, pred: Counter) -> float:
    if not gold and not pred:
        return 1.0
    if not gold or not pred:
        return 0.0
    common = sum((gold & pred).values())
    if common == 0:
        return 0.0
    precision = common / sum(pred.values())
    recall = common / sum(gold.values())
    return 2 * precision * recall / (precision + recall)


def token_f1(gold_text: str, predicted_text: str) -> float:
    return _overlap_f1(Counter(tokenize(gold_text)), Counter(tokenize(predicted_text)))


def rouge_2(gold_text: str, predicted_text: str) -> float:
    """ROUGE-2 F1 over bigram multisets."""
    gold = Counter(bigrams(tokenize(gold_text)))
    pred = Counter(bigrams(tokenize(predicted_text)))
    return _overlap_f1(gold, pred)
