from fmeco.index.aggregation import (
    AggregateReport,
    CohortStat,
    LevelScore,
    LongitudinalDiff,
    aggregate,
    group_compare,
    longitudinal_diff,
    median,
    new_information_split,
    simple_matching,
    smc_matrix,
)
from fmeco.index.agreement import (
    agreement_rate,
    cohens_kappa,
    disagreements,
    pooled_agreement,
    pooled_kappa,
    resolve,
)
from fmeco.index.schema import (
    NOT_APPLICABLE,
    Indicator,
    IndicatorSchema,
    ScoreSheet,
    compliance_schema,
    fmti_schema,
)

__all__ = [
    "NOT_APPLICABLE",
    "AggregateReport",
    "CohortStat",
    "Indicator",
    "IndicatorSchema",
    "LevelScore",
    "LongitudinalDiff",
    "ScoreSheet",
    "aggregate",
    "agreement_rate",
    "cohens_kappa",
    "compliance_schema",
    "disagreements",
    "fmti_schema",
    "group_compare",
    "longitudinal_diff",
    "median",
    "new_information_split",
    "pooled_agreement",
    "pooled_kappa",
    "resolve",
    "simple_matching",
    "smc_matrix",
]
