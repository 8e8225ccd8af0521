"""Regenerate the bundled fixture set under fixtures/.

Deterministic: a fixed seed, so rerunning leaves the files unchanged.
    python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from fmeco import ingest
from fmeco.efficiency import RuntimeModel, RuntimeSamples, TrainingHardwareSpec
from fmeco.homogenization import FailureMatrix
from fmeco.index.schema import ScoreSheet, compliance_schema, fmti_schema
from fmeco.metrics.records import GenerationStats, Perturbation, PredictionRecord, RankedList
from fmeco.scaling import ScalingCurve

ROOT = Path(__file__).resolve().parents[1] / "fixtures"
rng = np.random.default_rng(20240601)
datasets: list[dict] = []


def put(rel: str, text: str, **entry) -> None:
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    if entry:
        datasets.append({"path": rel, **entry})


# -- homogenization -----------------------------------------------------------

toy = np.array([
    [1, 1, 1], [1, 1, 1], [0, 0, 0], [0, 0, 0], [0, 0, 0],
    [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [0, 0, 0],
], dtype=np.int8)
matrix = FailureMatrix(tuple(f"i{i:02d}" for i in range(len(toy))), ("model-a", "model-b", "model-c"), toy)
put("homogenization/toy_matrix.csv", ingest.dump_failure_matrix(matrix),
    name="toy-matrix", kind="failure_matrix", format="csv")

# -- prediction logs ----------------------------------------------------------

MODELS = {"model-a": 1.2, "model-b": 0.6, "model-c": 0.0}
LABELS = ["yes", "no", "maybe"]
FAMILIES = [("dialect", "aave"), ("typos", "swap")]
N_QA = 24
difficulty = rng.normal(0.0, 1.0, N_QA)
gold = [LABELS[i % 3] for i in range(N_QA)]
tags = [["group:a"] if i % 2 == 0 else ["group:b"] for i in range(N_QA)]

for model, skill in MODELS.items():
    recs = []
    for i in range(N_QA):
        p = 1 / (1 + np.exp(-(skill - difficulty[i])))
        right = bool(rng.random() < p)
        pred = gold[i] if right else LABELS[(LABELS.index(gold[i]) + 1) % 3]
        conf = round(float(np.clip(p + rng.normal(0, 0.1), 0.05, 0.99)), 3)
        recs.append(PredictionRecord(f"qa-{i:02d}", gold[i], pred, conf, frozenset(tags[i])))
        if i % 4 == 0:
            for fam, var in FAMILIES:
                still = right and rng.random() < 0.8
                ppred = gold[i] if still else LABELS[(LABELS.index(gold[i]) + 2) % 3]
                recs.append(PredictionRecord(f"qa-{i:02d}", gold[i], ppred, conf, frozenset(tags[i]),
                                             Perturbation(fam, var)))
    put(f"metrics/qa_{model}.jsonl", ingest.dump_prediction_log(recs),
        name=f"qa-{model}", kind="prediction_log", format="jsonl", scenario="qa", model=model)

REFERENCES = [
    "the cat sat on the mat",
    "rain is expected in the north tomorrow",
    "the committee approved the new budget",
    "stocks rose sharply after the announcement",
    "the bridge will close for repairs next week",
]
for model, skill in MODELS.items():
    recs = []
    for i, ref in enumerate(REFERENCES):
        words = ref.split()
        keep = [w for w in words if rng.random() < 0.55 + 0.2 * skill]
        pred = " ".join(keep) if keep else words[0]
        recs.append(PredictionRecord(f"sum-{i:02d}", ref, pred))
    put(f"metrics/summarization_{model}.jsonl", ingest.dump_prediction_log(recs),
        name=f"summarization-{model}", kind="prediction_log", format="jsonl",
        scenario="summarization", model=model)

lists = [
    RankedList("q1", ("d1", "d2", "d3"), {"d1": 0, "d2": 1, "d3": 0}),
    RankedList("q2", ("d4", "d5", "d6", "d7"), {"d4": 3, "d5": 2, "d6": 0, "d7": 1}),
    RankedList("q3", ("d8", "d9"), {"d10": 2}),
]
put("metrics/ranked_lists.jsonl", ingest.dump_ranked_lists(lists),
    name="retrieval-model-a", kind="ranked_lists", format="jsonl", scenario="retrieval", model="model-a")

stats = GenerationStats(
    {"female": 30, "male": 70},
    {"engineer": {"female": 2, "male": 8}, "nurse": {"female": 7, "male": 3}, "teacher": {"female": 5, "male": 5}},
)
put("metrics/generation_stats.json", ingest.dump_generation_stats(stats),
    name="generations-model-a", kind="generation_stats", format="json", scenario="generation", model="model-a")

# -- composite index ----------------------------------------------------------

fmti = fmti_schema()
comp = compliance_schema()
put("index/fmti_schema.json", ingest.dump_schema(fmti), name="fmti-schema", kind="schema", format="json")
put("index/compliance_schema.json", ingest.dump_schema(comp), name="compliance-schema", kind="schema", format="json")


def binary_sheet(entity: str, rater: str, p: float, base: dict | None = None, flip: float = 0.0) -> ScoreSheet:
    scores = {}
    for iid in fmti.ids:
        if base is None:
            scores[iid] = int(rng.random() < p)
        else:
            scores[iid] = 1 - base[iid] if rng.random() < flip else base[iid]
    sources = {iid: f"https://example.org/{entity}/docs" for iid, v in scores.items() if v}
    return ScoreSheet(rater, entity, scores, sources, {}, frozenset(), frozenset(), fmti.name)


ENTITIES = {"atlas": ("open", 0.6), "borealis": ("closed", 0.35), "cirrus": ("closed", 0.25), "delta": ("open", 0.5)}
finals_2023 = {}
for entity, (cohort, p) in ENTITIES.items():
    sheet = binary_sheet(entity, "final", p)
    finals_2023[entity] = sheet
    put(f"index/fmti_2023_{entity}.json", ingest.dump_score_sheet_json(sheet, fmti),
        name=f"fmti-2023-{entity}", kind="score_sheet", format="json", schema=fmti.name,
        edition="2023", cohort=cohort)

for entity, (cohort, p) in ENTITIES.items():
    truth = {iid: min(1, v + int(rng.random() < 0.15)) for iid, v in finals_2023[entity].scores.items()}
    final = ScoreSheet("final", entity, truth, {i: f"https://example.org/{entity}/report" for i, v in truth.items() if v},
                       {}, frozenset(i for i, v in truth.items() if v and not finals_2023[entity].scores[i]),
                       frozenset(), fmti.name)
    put(f"index/fmti_2024_{entity}.json", ingest.dump_score_sheet_json(final, fmti),
        name=f"fmti-2024-{entity}", kind="score_sheet", format="json", schema=fmti.name,
        edition="2024", cohort=cohort, final=True)
    if entity == "atlas":
        for rater in ("rater-1", "rater-2"):
            s = binary_sheet(entity, rater, 0, base=truth, flip=0.08)
            put(f"index/fmti_2024_{entity}_{rater}.csv", ingest.dump_score_sheet_csv(s, fmti),
                name=f"fmti-2024-{entity}-{rater}", kind="score_sheet", format="csv", schema=fmti.name,
                edition="2024", rater=rater, entity=entity)

ones = ScoreSheet("final", "all-ones", {i: 1 for i in fmti.ids}, {}, {}, frozenset(), frozenset(), fmti.name)
put("index/fmti_all_ones.csv", ingest.dump_score_sheet_csv(ones, fmti),
    name="fmti-all-ones", kind="score_sheet", format="csv", schema=fmti.name,
    edition="2024", rater="final", entity="all-ones", final=True)

for entity, level in (("atlas", 4), ("borealis", None)):
    scores = {i: (level if level is not None else int(rng.integers(0, 5))) for i in comp.ids}
    sheet = ScoreSheet("final", entity, scores, {}, {}, frozenset(), frozenset(), comp.name)
    put(f"index/compliance_{entity}.json", ingest.dump_score_sheet_json(sheet, comp),
        name=f"compliance-{entity}", kind="score_sheet", format="json", schema=comp.name, edition="2023")

# -- efficiency ---------------------------------------------------------------

put("efficiency/hardware_spec.json", ingest.dump_hardware_spec(TrainingHardwareSpec(8, 0.4, 100.0, 1.1, 0.385)),
    name="small-run", kind="hardware_spec", format="json")
samples = RuntimeSamples(
    (0.912, 0.874, 1.31, 0.861, 0.905, 2.4, 0.88),
    RuntimeModel({128: 0.05, 512: 0.12, 2048: 0.4}, 0.02),
    ((100, 10), (512, 32), (3000, 5)),
)
put("efficiency/runtime_samples.json", ingest.dump_runtime_samples(samples),
    name="api-latency", kind="runtime_samples", format="json")

# -- scaling ------------------------------------------------------------------

emergent = ScalingCurve(((1e8, 0.26), (1e9, 0.24), (1e10, 0.27), (1e11, 0.55), (1e12, 0.7)), 0.25)
smooth = ScalingCurve(((1e8, 0.33), (1e9, 0.38), (1e10, 0.43), (1e11, 0.48)), 0.25)
put("scaling/emergent.csv", ingest.dump_scaling_curve(emergent),
    name="emergent-curve", kind="scaling_curve", format="csv", near_random_tol=0.05, jump_min=0.2)
put("scaling/smooth.csv", ingest.dump_scaling_curve(smooth),
    name="smooth-curve", kind="scaling_curve", format="csv", near_random_tol=0.05, jump_min=0.2)

# -- manifest and resolutions -------------------------------------------------

ordered = [{"name": d.pop("name"), "kind": d.pop("kind"), "path": d.pop("path"), "format": d.pop("format"), **d}
           for d in datasets]
put("manifest.json", json.dumps({"datasets": ordered}, indent=2) + "\n")

r1 = ingest.loads((ROOT / "index/fmti_2024_atlas_rater-1.csv").read_text(), "score_sheet", "csv",
                  meta={"rater": "rater-1", "entity": "atlas"})
r2 = ingest.loads((ROOT / "index/fmti_2024_atlas_rater-2.csv").read_text(), "score_sheet", "csv",
                  meta={"rater": "rater-2", "entity": "atlas"})
disputed = sorted(i for i in r1.scores if r1.scores[i] != r2.scores[i])
put("index/resolutions.json", json.dumps({"resolutions": [
    {"entity": "atlas", "edition": "2024", "scores": {i: max(r1.scores[i], r2.scores[i]) for i in disputed}}
]}, indent=2) + "\n")
