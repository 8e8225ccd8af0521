from fmeco.metrics.bias import association_bias, representation_bias, toxicity_rate
from fmeco.metrics.classification import (
    accuracy,
    coverage_accuracy_auc,
    coverage_accuracy_curve,
    ece,
    has_confidences,
    performance_disparities,
    selective_accuracy,
    worst_case_accuracy,
)
from fmeco.metrics.meta import head_to_head_win_rates, metric_correlation, pearson, spearman
from fmeco.metrics.ranking import ndcg, reciprocal_rank
from fmeco.metrics.records import (
    ORIGINAL,
    GenerationStats,
    Perturbation,
    PredictionRecord,
    RankedList,
)
from fmeco.metrics.text import rouge_2, token_f1

__all__ = [
    "ORIGINAL",
    "GenerationStats",
    "Perturbation",
    "PredictionRecord",
    "RankedList",
    "accuracy",
    "association_bias",
    "coverage_accuracy_auc",
    "coverage_accuracy_curve",
    "ece",
    "has_confidences",
    "head_to_head_win_rates",
    "metric_correlation",
    "ndcg",
    "pearson",
    "performance_disparities",
    "reciprocal_rank",
    "representation_bias",
    "rouge_2",
    "selective_accuracy",
    "spearman",
    "token_f1",
    "toxicity_rate",
    "worst_case_accuracy",
]
