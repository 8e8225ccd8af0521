"""Training energy/emissions estimates and inference runtime models.

Units are fixed: kilowatts, hours, kWh, kgCO2 per kWh, kilograms, seconds.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence


def _finite(name: str, value: float) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class TrainingHardwareSpec:
    n_gpu: int
    w_gpu: float  # kW per accelerator, averaged over training
    t_train: float  # hours
    pue: float = 1.1
    c_region: float = 0.0  # kgCO2 per kWh

    def __post_init__(self):
        if isinstance(self.n_gpu, bool) or not isinstance(self.n_gpu, int) or self.n_gpu < 1:
            raise ValueError(f"n_gpu must be an integer >= 1, got {self.n_gpu!r}")
        if _finite("w_gpu", self.w_gpu) <= 0:
            raise ValueError("w_gpu must be > 0 kW")
        if _finite("t_train", self.t_train) <= 0:
            raise ValueError("t_train must be > 0 hours")
        if _finite("pue", self.pue) < 1:
            raise ValueError("pue must be >= 1")
        if _finite("c_region", self.c_region) < 0:
            raise ValueError("c_region must be >= 0 kgCO2/kWh")


@dataclass(frozen=True)
class RuntimeModel:
    """Encode latency by prompt-size bucket plus a fixed per-output-token latency."""

    encode_table: Mapping[int, float]
    per_token: float

    def __post_init__(self):
        if not self.encode_table:
            raise ValueError("encode_table is empty")
        table = {}
        for bucket, latency in self.encode_table.items():
            if isinstance(bucket, bool) or not isinstance(bucket, int) or bucket < 0:
                raise ValueError(f"bucket {bucket!r} must be a non-negative integer token count")
            if _finite(f"encode latency for bucket {bucket}", latency) <= 0:
                raise ValueError(f"encode latency for bucket {bucket} must be > 0")
            table[bucket] = float(latency)
        if _finite("per_token", self.per_token) <= 0:
            raise ValueError("per_token must be > 0")
        object.__setattr__(self, "encode_table", dict(sorted(table.items())))

    @property
    def buckets(self) -> list[int]:
        return list(self.encode_table)


def training_energy(spec: TrainingHardwareSpec) -> float:
    """kWh = n_gpu * w_gpu * t_train * pue."""
    return spec.n_gpu * spec.w_gpu * spec.t_train * spec.pue


def training_emissions(energy_kwh: float, c_region: float) -> float:
    """kgCO2 = energy * carbon intensity."""
    if _finite("energy_kwh", energy_kwh) < 0:
        raise ValueError("energy_kwh must be >= 0")
    if _finite("c_region", c_region) < 0:
        raise ValueError("c_region must be >= 0")
    return energy_kwh * c_region


def encode_latency(prompt_tokens: int, model: RuntimeModel) -> tuple[float, bool]:
    """Latency of the smallest bucket >= prompt size, and whether the table was exceeded."""
    buckets = model.buckets
    i = bisect.bisect_left(buckets, prompt_tokens)
    if i == len(buckets):
        return model.encode_table[buckets[-1]], True
    return model.encode_table[buckets[i]], False


def idealized_runtime(prompt_tokens: int, output_tokens: int, model: RuntimeModel) -> tuple[float, bool]:
    """Seconds for one request, plus a flag set when the prompt exceeds the largest bucket."""
    if prompt_tokens < 0 or output_tokens < 0:
        raise ValueError("token counts must be >= 0")
    encode, exceeded = encode_latency(prompt_tokens, model)
    return encode + model.per_token * output_tokens, exceeded


def denoised_runtime(samples: Sequence[float], percentile: float = 0) -> float:
    """Nearest-rank lower percentile of observed latencies; the default is the minimum."""
    if not samples:
        raise ValueError("no runtime samples")
    for s in samples:
        if _finite("runtime sample", s) <= 0:
            raise ValueError(f"runtime sample {s!r} must be > 0 seconds")
    if not 0 <= percentile <= 100:
        raise ValueError(f"percentile must be in [0, 100], got {percentile!r}")
    ordered = sorted(samples)
    rank = max(1, math.ceil(percentile / 100 * len(ordered)))
    return ordered[rank - 1]


@dataclass(frozen=True)
class RuntimeSamples:
    """Observed request latencies, optionally with a runtime model and request sizes to price."""

    latencies: tuple[float, ...]
    runtime_model: Optional[RuntimeModel] = None
    requests: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        lat = tuple(self.latencies)
        if not lat:
            raise ValueError("no runtime samples")
        for s in lat:
            if _finite("runtime sample", s) <= 0:
                raise ValueError(f"runtime sample {s!r} must be > 0 seconds")
        reqs = tuple((int(p), int(o)) for p, o in self.requests)
        if any(p < 0 or o < 0 for p, o in reqs):
            raise ValueError("request token counts must be >= 0")
        object.__setattr__(self, "latencies", lat)
        object.__setattr__(self, "requests", reqs)
