"""Ecosystem-level outcome analysis over a failure matrix.

Rows are instances (individuals), columns are decision-makers (models) and a
cell is 1 when the model's prediction for that instance was wrong. The
observed distribution of per-instance failure counts is compared with the
count distribution implied by treating models as independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from fmeco.pbdist import poisson_binomial_pmf


@dataclass(frozen=True, eq=False)
class FailureMatrix:
    instance_ids: tuple[str, ...]
    model_ids: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self):
        ids = tuple(str(i) for i in self.instance_ids)
        models = tuple(str(m) for m in self.model_ids)
        cells = np.array(self.cells, dtype=np.int8, copy=True)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-D array")
        if cells.shape != (len(ids), len(models)):
            raise ValueError(
                f"cells shape {cells.shape} does not match "
                f"{len(ids)} instances x {len(models)} models"
            )
        if not ids or not models:
            raise ValueError("failure matrix needs at least one instance and one model")
        if len(set(ids)) != len(ids):
            raise ValueError("instance ids must be unique")
        if len(set(models)) != len(models):
            raise ValueError("model ids must be unique")
        if not np.isin(cells, (0, 1)).all():
            raise ValueError("every cell must be 0 or 1")
        cells.setflags(write=False)
        object.__setattr__(self, "instance_ids", ids)
        object.__setattr__(self, "model_ids", models)
        object.__setattr__(self, "cells", cells)

    @property
    def n_instances(self) -> int:
        return self.cells.shape[0]

    @property
    def n_models(self) -> int:
        return self.cells.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FailureMatrix):
            return NotImplemented
        return (
            self.instance_ids == other.instance_ids
            and self.model_ids == other.model_ids
            and np.array_equal(self.cells, other.cells)
        )

    __hash__ = None


@dataclass(frozen=True)
class HomogenizationReport:
    model_ids: tuple[str, ...]
    failure_rates: tuple[float, ...]
    observed: tuple[float, ...]
    baseline: tuple[float, ...]
    systemic_failure_rate: float
    endpoint_excess: tuple[float, float]

    def rows(self) -> list[dict]:
        """Per-t comparison table (the plot data for observed vs baseline)."""
        return [
            {"failures": t, "observed": o, "baseline": b, "excess": o - b}
            for t, (o, b) in enumerate(zip(self.observed, self.baseline))
        ]


def from_predictions(
    gold: Mapping[Hashable, object],
    predictions: Mapping[str, Mapping[Hashable, object]],
) -> FailureMatrix:
    """Build a failure matrix from gold labels and per-model predictions.

    Every model must predict every instance in ``gold``; missing cells are
    rejected rather than imputed.
    """
    instance_ids = list(gold)
    model_ids = list(predictions)
    cells = np.zeros((len(instance_ids), len(model_ids)), dtype=np.int8)
    for j, model in enumerate(model_ids):
        preds = predictions[model]
        missing = [i for i in instance_ids if i not in preds]
        if missing:
            raise ValueError(f"model {model!r} has no prediction for instance {missing[0]!r}")
        for i, inst in enumerate(instance_ids):
            cells[i, j] = preds[inst] != gold[inst]
    return FailureMatrix(tuple(map(str, instance_ids)), tuple(model_ids), cells)


def failure_rates(matrix: FailureMatrix) -> np.ndarray:
    return matrix.cells.sum(axis=0) / matrix.n_instances


def canonicalize(matrix: FailureMatrix) -> FailureMatrix:
    """Reorder columns by ascending failure rate, ties broken by model id."""
    counts = matrix.cells.sum(axis=0)
    # Integer counts share the denominator N, so comparing them is exact.
    order = sorted(range(matrix.n_models), key=lambda j: (int(counts[j]), matrix.model_ids[j]))
    return FailureMatrix(
        matrix.instance_ids,
        tuple(matrix.model_ids[j] for j in order),
        matrix.cells[:, order],
    )


def observed_distribution(matrix: FailureMatrix) -> np.ndarray:
    row_sums = matrix.cells.sum(axis=1)
    counts = np.bincount(row_sums, minlength=matrix.n_models + 1)
    return counts / matrix.n_instances


def baseline_distribution(matrix: FailureMatrix) -> np.ndarray:
    return poisson_binomial_pmf(failure_rates(matrix))


def systemic_failure_rate(matrix: FailureMatrix) -> float:
    """Fraction of instances that every model fails on."""
    return float(matrix.cells.all(axis=1).mean())


def analyze(matrix: FailureMatrix) -> HomogenizationReport:
    matrix = canonicalize(matrix)
    observed = observed_distribution(matrix)
    baseline = baseline_distribution(matrix)
    k = matrix.n_models
    return HomogenizationReport(
        model_ids=matrix.model_ids,
        failure_rates=tuple(float(r) for r in failure_rates(matrix)),
        observed=tuple(float(x) for x in observed),
        baseline=tuple(float(x) for x in baseline),
        systemic_failure_rate=systemic_failure_rate(matrix),
        endpoint_excess=(
            float(observed[0] - baseline[0]),
            float(observed[k] - baseline[k]),
        ),
    )


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())
