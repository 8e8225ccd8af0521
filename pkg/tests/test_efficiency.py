import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmeco.efficiency import (
    RuntimeModel,
    RuntimeSamples,
    TrainingHardwareSpec,
    denoised_runtime,
    encode_latency,
    idealized_runtime,
    training_emissions,
    training_energy,
)


def test_energy_examples():
    assert training_energy(TrainingHardwareSpec(1, 1.0, 1.0, 1.0)) == 1.0
    assert training_energy(TrainingHardwareSpec(8, 0.4, 100.0, 1.1)) == 352.0


def test_default_pue():
    assert TrainingHardwareSpec(1, 1.0, 1.0).pue == 1.1


@pytest.mark.parametrize("kwargs", [
    {"n_gpu": 0}, {"n_gpu": 1.5}, {"w_gpu": 0}, {"t_train": -1}, {"pue": 0.9},
    {"c_region": -0.1}, {"w_gpu": float("inf")},
])
def test_spec_validation(kwargs):
    base = {"n_gpu": 1, "w_gpu": 1.0, "t_train": 1.0, "pue": 1.1, "c_region": 0.0}
    with pytest.raises(ValueError):
        TrainingHardwareSpec(**{**base, **kwargs})


def test_emissions_examples():
    assert training_emissions(0, 0.7) == 0
    assert training_emissions(352, 0.5) == 176
    assert training_emissions(812_000, 207_000 / 812_000) == pytest.approx(207_000, rel=1e-6)


@given(st.integers(1, 4096), st.floats(0.01, 2.0), st.floats(0.1, 1e5), st.floats(1.0, 2.0),
       st.sampled_from(["n_gpu", "w_gpu", "t_train", "pue"]))
def test_energy_linear_in_each_factor(n, w, t, pue, field):
    spec = TrainingHardwareSpec(n, w, t, pue)
    doubled = dataclasses.replace(spec, **{field: getattr(spec, field) * 2})
    assert training_energy(doubled) == pytest.approx(2 * training_energy(spec), rel=1e-12)


@given(st.floats(0, 1e9), st.floats(0, 2))
def test_emissions_linear(energy, c):
    assert training_emissions(2 * energy, c) == pytest.approx(2 * training_emissions(energy, c), rel=1e-12)
    assert training_emissions(energy, 2 * c) == pytest.approx(2 * training_emissions(energy, c), rel=1e-12)


MODEL = RuntimeModel({100: 0.05, 500: 0.2}, 0.02)


def test_idealized_runtime_examples():
    assert idealized_runtime(80, 10, RuntimeModel({100: 0.05}, 0.02)) == (pytest.approx(0.25), False)
    assert idealized_runtime(80, 0, MODEL) == (0.05, False)
    assert idealized_runtime(100, 0, MODEL)[0] == 0.05
    assert idealized_runtime(101, 0, MODEL)[0] == 0.2
    assert idealized_runtime(900, 0, MODEL) == (0.2, True)


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_one_more_output_token_adds_per_token_latency(p, o):
    a, _ = idealized_runtime(p, o, MODEL)
    b, _ = idealized_runtime(p, o + 1, MODEL)
    assert b - a == pytest.approx(MODEL.per_token, abs=1e-9)


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_encode_latency_monotone_in_prompt(p, q):
    lo, hi = sorted((p, q))
    assert encode_latency(lo, MODEL)[0] <= encode_latency(hi, MODEL)[0]


def test_runtime_model_validation():
    with pytest.raises(ValueError):
        RuntimeModel({}, 0.1)
    with pytest.raises(ValueError):
        RuntimeModel({10: -1.0}, 0.1)
    with pytest.raises(ValueError):
        RuntimeModel({10: 1.0}, 0.0)
    assert RuntimeModel({500: 0.2, 100: 0.05}, 0.1).buckets == [100, 500]


def test_denoised_runtime_examples():
    assert denoised_runtime([2.0, 2.0, 2.0]) == 2.0
    assert denoised_runtime([1.0, 1.2, 5.0]) == 1.0
    assert denoised_runtime([1, 2, 3], 50) == 2
    assert denoised_runtime([3, 1, 2], 100) == 3
    with pytest.raises(ValueError):
        denoised_runtime([])
    with pytest.raises(ValueError):
        denoised_runtime([1.0], 101)
    with pytest.raises(ValueError):
        denoised_runtime([0.0])


@given(st.lists(st.floats(0.001, 100), min_size=1, max_size=30), st.floats(0, 100))
def test_denoised_runtime_is_an_observed_sample_at_nearest_rank(samples, pct):
    v = denoised_runtime(samples, pct)
    assert v in samples
    below = sum(s <= v for s in samples)
    assert below / len(samples) >= pct / 100 - 1e-12


def test_runtime_samples_validation():
    with pytest.raises(ValueError):
        RuntimeSamples(())
    with pytest.raises(ValueError):
        RuntimeSamples((1.0,), None, ((-1, 2),))
