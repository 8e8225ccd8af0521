"""Input file formats: parsing, validation, serialization and manifests.

FORMATS.md at the repository root is the normative description of every
format handled here. All files are UTF-8; CSV follows RFC 4180; JSONL holds
one JSON object per line. NaN and Infinity are rejected everywhere.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from fmeco.efficiency import RuntimeModel, RuntimeSamples, TrainingHardwareSpec
from fmeco.homogenization import FailureMatrix
from fmeco.index.schema import NOT_APPLICABLE, Indicator, IndicatorSchema, ScoreSheet
from fmeco.metrics.records import GenerationStats, Perturbation, PredictionRecord, RankedList
from fmeco.scaling import ScalingCurve

SUPPORTED_FORMATS: dict[str, tuple[str, ...]] = {
    "prediction_log": ("jsonl",),
    "failure_matrix": ("csv",),
    "ranked_lists": ("jsonl",),
    "generation_stats": ("json",),
    "score_sheet": ("csv", "json"),
    "schema": ("json",),
    "hardware_spec": ("json",),
    "runtime_samples": ("json",),
    "scaling_curve": ("csv",),
}

HARDWARE_UNITS = {"w_gpu": "kW", "t_train": "h", "c_region": "kgCO2/kWh"}
SHEET_COLUMNS = ["indicator_id", "score", "source", "justification", "new_information"]


class IngestError(ValueError):
    """A file failed to parse or validate.

    ``line`` is a 1-based line number (CSV, JSONL) or ``None`` for whole-document
    JSON, where ``field`` carries the path to the offending value instead.
    """

    def __init__(self, file: str, line: Optional[int], field: Optional[str], message: str):
        self.file = file
        self.line = line
        self.field = field
        self.message = message
        where = file if line is None else f"{file}:{line}"
        what = f" [{field}]" if field else ""
        super().__init__(f"{where}{what}: {message}")


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    kind: str
    path: Path
    format: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in SUPPORTED_FORMATS:
            raise ValueError(f"dataset {self.name!r}: unknown kind {self.kind!r}")
        if self.format not in SUPPORTED_FORMATS[self.kind]:
            raise ValueError(
                f"dataset {self.name!r}: format {self.format!r} not supported for kind "
                f"{self.kind!r} (expected one of {', '.join(SUPPORTED_FORMATS[self.kind])})"
            )


# -- low-level helpers -------------------------------------------------------


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValueError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _json_loads(text: str, file: str, line: Optional[int] = None):
    try:
        return json.loads(text, parse_constant=_reject_constant, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise IngestError(file, line if line is not None else exc.lineno, None, f"invalid JSON: {exc.msg}") from None
    except ValueError as exc:
        raise IngestError(file, line, None, str(exc)) from None


def _json_dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False, indent=2) + "\n"


class _Reader:
    """Carries the file name so every error can be located."""

    def __init__(self, file: str):
        self.file = file

    def fail(self, line, fld, message):
        raise IngestError(self.file, line, fld, message)

    def obj(self, value, line, fld) -> dict:
        if not isinstance(value, dict):
            self.fail(line, fld, f"expected an object, got {type(value).__name__}")
        return value

    def keys(self, obj: dict, line, fld, required, optional=()):
        for k in required:
            if k not in obj:
                self.fail(line, f"{fld}.{k}" if fld else k, "missing required field")
        allowed = set(required) | set(optional)
        for k in obj:
            if k not in allowed:
                self.fail(line, f"{fld}.{k}" if fld else k, "unknown field")

    def string(self, value, line, fld) -> str:
        if not isinstance(value, str) or not value:
            self.fail(line, fld, f"expected a non-empty string, got {value!r}")
        return value

    def number(self, value, line, fld) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(line, fld, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            self.fail(line, fld, f"non-finite number {value!r}")
        return value

    def integer(self, value, line, fld) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(line, fld, f"expected an integer, got {value!r}")
        return value

    def csv_number(self, text: str, line, fld) -> float:
        try:
            value = float(text)
        except ValueError:
            self.fail(line, fld, f"expected a number, got {text!r}")
        if not math.isfinite(value):
            self.fail(line, fld, f"non-finite number {text!r}")
        return value

    def wrap(self, line, fld, build):
        """Run a constructor, turning its ValueError into a located IngestError."""
        try:
            return build()
        except IngestError:
            raise
        except ValueError as exc:
            self.fail(line, fld, str(exc))


def _csv_rows(text: str):
    reader = csv.reader(io.StringIO(text, newline=""))
    for row in reader:
        yield reader.line_num, row


def _csv_text(rows) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerows(rows)
    return buf.getvalue()


def _jsonl_lines(text: str):
    # Split on newlines only: U+2028 and friends may legally appear inside JSON strings.
    for lineno, raw in enumerate(text.split("\n"), start=1):
        yield lineno, raw.removesuffix("\r")


# -- prediction logs ---------------------------------------------------------

_LABEL_TYPES = (str, int, float, bool)


def parse_prediction_log(text: str, file: str = "<string>") -> tuple[PredictionRecord, ...]:
    r = _Reader(file)
    records = []
    seen: dict[tuple, int] = {}
    for lineno, raw in _jsonl_lines(text):
        if not raw.strip():
            continue
        obj = r.obj(_json_loads(raw, file, lineno), lineno, None)
        r.keys(obj, lineno, "", ["instance_id", "gold", "predicted"],
               ["confidence", "group_tags", "perturbation"])
        inst = r.string(obj["instance_id"], lineno, "instance_id")
        for k in ("gold", "predicted"):
            v = obj[k]
            if not isinstance(v, _LABEL_TYPES) or (isinstance(v, float) and not math.isfinite(v)):
                r.fail(lineno, k, f"expected a string or number, got {v!r}")
        conf = obj.get("confidence")
        if conf is not None:
            r.number(conf, lineno, "confidence")
            if not 0.0 <= conf <= 1.0:
                r.fail(lineno, "confidence", f"value {conf!r} outside [0, 1]")
        tags = obj.get("group_tags") or []
        if not isinstance(tags, list):
            r.fail(lineno, "group_tags", "expected a list of strings")
        for i, t in enumerate(tags):
            r.string(t, lineno, f"group_tags[{i}]")
        pert = obj.get("perturbation")
        perturbation = None
        if pert is not None:
            r.obj(pert, lineno, "perturbation")
            r.keys(pert, lineno, "perturbation", ["family", "variant"])
            perturbation = Perturbation(
                r.string(pert["family"], lineno, "perturbation.family"),
                r.string(pert["variant"], lineno, "perturbation.variant"),
            )
        rec = r.wrap(lineno, None, lambda: PredictionRecord(
            inst, obj["gold"], obj["predicted"], conf, frozenset(tags), perturbation))
        if rec.key in seen:
            r.fail(lineno, "instance_id",
                   f"duplicate (instance_id, perturbation) {rec.key!r}, first seen on line {seen[rec.key]}")
        seen[rec.key] = lineno
        records.append(rec)
    return tuple(records)


def dump_prediction_log(records) -> str:
    lines = []
    for rec in records:
        obj: dict[str, Any] = {"instance_id": rec.instance_id, "gold": rec.gold, "predicted": rec.predicted}
        if rec.confidence is not None:
            obj["confidence"] = rec.confidence
        if rec.group_tags:
            obj["group_tags"] = sorted(rec.group_tags)
        if rec.perturbation is not None:
            obj["perturbation"] = {"family": rec.perturbation.family, "variant": rec.perturbation.variant}
        lines.append(json.dumps(obj, ensure_ascii=False, allow_nan=False))
    return "\n".join(lines) + "\n" if lines else ""


# -- failure matrices --------------------------------------------------------


def parse_failure_matrix(text: str, file: str = "<string>") -> FailureMatrix:
    r = _Reader(file)
    rows = list(_csv_rows(text))
    if not rows:
        r.fail(1, None, "empty file")
    header_line, header = rows[0]
    if not header or header[0] != "instance_id":
        r.fail(header_line, "instance_id", "first header column must be 'instance_id'")
    models = header[1:]
    if not models:
        r.fail(header_line, None, "no model columns")
    dup = [m for m in models if models.count(m) > 1]
    if dup:
        r.fail(header_line, dup[0], "duplicate model id")
    ids, cells, seen = [], [], {}
    for lineno, row in rows[1:]:
        if not row:
            continue
        if len(row) != len(header):
            r.fail(lineno, None, f"expected {len(header)} columns, got {len(row)}")
        inst = row[0]
        if not inst:
            r.fail(lineno, "instance_id", "empty instance id")
        if inst in seen:
            r.fail(lineno, "instance_id", f"duplicate instance id {inst!r} (first on line {seen[inst]})")
        seen[inst] = lineno
        vals = []
        for model, cell in zip(models, row[1:]):
            if cell == "":
                r.fail(lineno, model, "missing cell; failure matrices must be complete")
            if cell not in ("0", "1"):
                r.fail(lineno, model, f"cell must be 0 or 1, got {cell!r}")
            vals.append(int(cell))
        ids.append(inst)
        cells.append(vals)
    if not ids:
        r.fail(header_line, None, "no instance rows")
    return r.wrap(None, None, lambda: FailureMatrix(tuple(ids), tuple(models), np.array(cells)))


def dump_failure_matrix(matrix: FailureMatrix) -> str:
    rows = [["instance_id", *matrix.model_ids]]
    for inst, cells in zip(matrix.instance_ids, matrix.cells):
        rows.append([inst, *(str(int(c)) for c in cells)])
    return _csv_text(rows)


# -- ranked lists ------------------------------------------------------------


def parse_ranked_lists(text: str, file: str = "<string>") -> tuple[RankedList, ...]:
    r = _Reader(file)
    out, seen = [], {}
    for lineno, raw in _jsonl_lines(text):
        if not raw.strip():
            continue
        obj = r.obj(_json_loads(raw, file, lineno), lineno, None)
        r.keys(obj, lineno, "", ["query_id", "ranking"], ["relevance"])
        qid = r.string(obj["query_id"], lineno, "query_id")
        if qid in seen:
            r.fail(lineno, "query_id", f"duplicate query id {qid!r} (first on line {seen[qid]})")
        seen[qid] = lineno
        ranking = obj["ranking"]
        if not isinstance(ranking, list):
            r.fail(lineno, "ranking", "expected a list of document ids")
        for i, d in enumerate(ranking):
            r.string(d, lineno, f"ranking[{i}]")
        rel = r.obj(obj.get("relevance", {}), lineno, "relevance")
        for doc, v in rel.items():
            r.number(v, lineno, f"relevance.{doc}")
            if v < 0:
                r.fail(lineno, f"relevance.{doc}", f"relevance {v!r} must be >= 0")
        out.append(r.wrap(lineno, "ranking", lambda: RankedList(qid, tuple(ranking), rel)))
    return tuple(out)


def dump_ranked_lists(lists) -> str:
    lines = [
        json.dumps({"query_id": rl.query_id, "ranking": list(rl.ranking), "relevance": dict(rl.relevance)},
                   ensure_ascii=False, allow_nan=False)
        for rl in lists
    ]
    return "\n".join(lines) + "\n" if lines else ""


# -- generation statistics ---------------------------------------------------


def parse_generation_stats(text: str, file: str = "<string>") -> GenerationStats:
    r = _Reader(file)
    obj = r.obj(_json_loads(text, file), None, None)
    r.keys(obj, None, "", ["group_counts"], ["cooccurrence"])
    counts = r.obj(obj["group_counts"], None, "group_counts")
    for g, v in counts.items():
        if r.integer(v, None, f"group_counts.{g}") < 0:
            r.fail(None, f"group_counts.{g}", "count must be >= 0")
    co = r.obj(obj.get("cooccurrence", {}), None, "cooccurrence")
    for term, per_group in co.items():
        r.obj(per_group, None, f"cooccurrence.{term}")
        for g, v in per_group.items():
            if r.integer(v, None, f"cooccurrence.{term}.{g}") < 0:
                r.fail(None, f"cooccurrence.{term}.{g}", "count must be >= 0")
    return GenerationStats(counts, co)


def dump_generation_stats(stats: GenerationStats) -> str:
    return _json_dumps({"group_counts": dict(stats.group_counts), "cooccurrence": {
        t: dict(pg) for t, pg in stats.cooccurrence.items()}})


# -- indicator schemas -------------------------------------------------------


def parse_schema(text: str, file: str = "<string>") -> IndicatorSchema:
    r = _Reader(file)
    obj = r.obj(_json_loads(text, file), None, None)
    r.keys(obj, None, "", ["name", "indicators"], ["default_zero"])
    name = r.string(obj["name"], None, "name")
    default_zero = obj.get("default_zero", False)
    if not isinstance(default_zero, bool):
        r.fail(None, "default_zero", "expected true or false")
    raw = obj["indicators"]
    if not isinstance(raw, list):
        r.fail(None, "indicators", "expected a list")
    inds = []
    for i, ind in enumerate(raw):
        fld = f"indicators[{i}]"
        r.obj(ind, None, fld)
        r.keys(ind, None, fld, ["id", "name", "domain", "subdomain"], ["scale_max"])
        scale = r.integer(ind.get("scale_max", 1), None, f"{fld}.scale_max")
        inds.append(r.wrap(None, fld, lambda: Indicator(
            r.string(ind["id"], None, f"{fld}.id"),
            r.string(ind["name"], None, f"{fld}.name"),
            r.string(ind["domain"], None, f"{fld}.domain"),
            r.string(ind["subdomain"], None, f"{fld}.subdomain"),
            scale,
        )))
    return r.wrap(None, "indicators", lambda: IndicatorSchema(name, tuple(inds), default_zero))


def dump_schema(schema: IndicatorSchema) -> str:
    return _json_dumps({
        "name": schema.name,
        "default_zero": schema.default_zero,
        "indicators": [
            {"id": i.id, "name": i.name, "domain": i.domain, "subdomain": i.subdomain, "scale_max": i.scale_max}
            for i in schema.indicators
        ],
    })


# -- score sheets ------------------------------------------------------------


def _check_sheet(r: _Reader, sheet: ScoreSheet, schema: Optional[IndicatorSchema], lines: dict):
    if schema is None:
        return
    for iid in sorted(set(sheet.scores) | sheet.not_applicable, key=lambda i: lines.get(i, 0)):
        if iid not in schema:
            r.fail(lines.get(iid), "indicator_id", f"unknown indicator id {iid!r} (not in schema {schema.name!r})")
        if iid in sheet.scores:
            top = schema[iid].scale_max
            if not 0 <= sheet.scores[iid] <= top:
                r.fail(lines.get(iid), "score", f"indicator {iid!r}: score {sheet.scores[iid]} outside scale 0..{top}")


def parse_score_sheet_csv(
    text: str,
    file: str = "<string>",
    *,
    rater_id: str,
    entity_id: str,
    schema_name: Optional[str] = None,
    schema: Optional[IndicatorSchema] = None,
) -> ScoreSheet:
    r = _Reader(file)
    rows = list(_csv_rows(text))
    if not rows:
        r.fail(1, None, "empty file")
    header_line, header = rows[0]
    if header != SHEET_COLUMNS:
        r.fail(header_line, None, f"header must be {','.join(SHEET_COLUMNS)}")
    scores, na, sources, justs, new, lines = {}, set(), {}, {}, set(), {}
    for lineno, row in rows[1:]:
        if not row:
            continue
        if len(row) != len(SHEET_COLUMNS):
            r.fail(lineno, None, f"expected {len(SHEET_COLUMNS)} columns, got {len(row)}")
        iid, score, source, just, flag = row
        if not iid:
            r.fail(lineno, "indicator_id", "empty indicator id")
        if iid in lines:
            r.fail(lineno, "indicator_id", f"duplicate indicator id {iid!r} (first on line {lines[iid]})")
        lines[iid] = lineno
        if score == NOT_APPLICABLE:
            na.add(iid)
        elif score != "":
            try:
                scores[iid] = int(score)
            except ValueError:
                r.fail(lineno, "score", f"expected an integer, {NOT_APPLICABLE!r} or empty, got {score!r}")
        if source:
            sources[iid] = source
        if just:
            justs[iid] = just
        if flag not in ("", "0", "1"):
            r.fail(lineno, "new_information", f"expected 0, 1 or empty, got {flag!r}")
        if flag == "1":
            if iid not in scores:
                r.fail(lineno, "new_information", "only scored indicators can be flagged as new information")
            new.add(iid)
    sheet = r.wrap(None, None, lambda: ScoreSheet(
        rater_id, entity_id, scores, sources, justs, frozenset(new), frozenset(na), schema_name))
    _check_sheet(r, sheet, schema, lines)
    return sheet


def dump_score_sheet_csv(sheet: ScoreSheet, schema: Optional[IndicatorSchema] = None) -> str:
    ids = set(sheet.scores) | sheet.not_applicable | set(sheet.sources) | set(sheet.justifications)
    order = [i for i in schema.ids if i in ids] if schema else sorted(ids)
    rows = [SHEET_COLUMNS]
    for iid in order:
        entry = sheet.entry(iid)
        rows.append([
            iid,
            "" if entry is None else str(entry),
            sheet.sources.get(iid, ""),
            sheet.justifications.get(iid, ""),
            "1" if iid in sheet.new_information else "0",
        ])
    return _csv_text(rows)


def parse_score_sheet_json(
    text: str,
    file: str = "<string>",
    *,
    schema: Optional[IndicatorSchema] = None,
    rater_id: Optional[str] = None,
    entity_id: Optional[str] = None,
    schema_name: Optional[str] = None,
) -> ScoreSheet:
    r = _Reader(file)
    obj = r.obj(_json_loads(text, file), None, None)
    r.keys(obj, None, "", ["scores"],
           ["rater_id", "entity_id", "schema", "sources", "justifications", "new_information"])
    rater = obj.get("rater_id", rater_id)
    entity = obj.get("entity_id", entity_id)
    r.string(rater, None, "rater_id")
    r.string(entity, None, "entity_id")
    sname = obj.get("schema", schema_name)
    if sname is not None:
        r.string(sname, None, "schema")
    scores, na = {}, set()
    for iid, v in r.obj(obj["scores"], None, "scores").items():
        if v == NOT_APPLICABLE:
            na.add(iid)
        elif v is not None:
            scores[iid] = r.integer(v, None, f"scores.{iid}")
    texts = {}
    for k in ("sources", "justifications"):
        texts[k] = r.obj(obj.get(k, {}), None, k)
        for iid, t in texts[k].items():
            if not isinstance(t, str):
                r.fail(None, f"{k}.{iid}", "expected a string")
    new = obj.get("new_information", [])
    if not isinstance(new, list):
        r.fail(None, "new_information", "expected a list of indicator ids")
    for i, iid in enumerate(new):
        r.string(iid, None, f"new_information[{i}]")
    sheet = r.wrap(None, "scores", lambda: ScoreSheet(
        rater, entity, scores, texts["sources"], texts["justifications"], frozenset(new), frozenset(na), sname))
    if schema is not None:
        try:
            sheet.check(schema)
        except ValueError as exc:
            r.fail(None, "scores", str(exc))
    return sheet


def dump_score_sheet_json(sheet: ScoreSheet, schema: Optional[IndicatorSchema] = None) -> str:
    ids = set(sheet.scores) | sheet.not_applicable
    order = [i for i in schema.ids if i in ids] if schema else sorted(ids)
    obj: dict[str, Any] = {"rater_id": sheet.rater_id, "entity_id": sheet.entity_id}
    if sheet.schema_name:
        obj["schema"] = sheet.schema_name
    obj["scores"] = {i: sheet.entry(i) for i in order}
    obj["sources"] = dict(sorted(sheet.sources.items()))
    obj["justifications"] = dict(sorted(sheet.justifications.items()))
    obj["new_information"] = sorted(sheet.new_information)
    return _json_dumps(obj)


# -- hardware specs and runtime samples --------------------------------------


def parse_hardware_spec(text: str, file: str = "<string>") -> TrainingHardwareSpec:
    r = _Reader(file)
    obj = r.obj(_json_loads(text, file), None, None)
    r.keys(obj, None, "", ["n_gpu", "w_gpu", "t_train"], ["pue", "c_region"])
    values = {}
    for k, unit in HARDWARE_UNITS.items():
        if k not in obj:
            continue
        q = r.obj(obj[k], None, k)
        r.keys(q, None, k, ["value", "unit"])
        if q["unit"] != unit:
            r.fail(None, f"{k}.unit", f"expected unit {unit!r}, got {q['unit']!r}")
        values[k] = r.number(q["value"], None, f"{k}.value")
    n_gpu = r.integer(obj["n_gpu"], None, "n_gpu")
    pue = r.number(obj.get("pue", 1.1), None, "pue")
    return r.wrap(None, None, lambda: TrainingHardwareSpec(
        n_gpu, values["w_gpu"], values["t_train"], pue, values.get("c_region", 0.0)))


def dump_hardware_spec(spec: TrainingHardwareSpec) -> str:
    return _json_dumps({
        "n_gpu": spec.n_gpu,
        "w_gpu": {"value": spec.w_gpu, "unit": "kW"},
        "t_train": {"value": spec.t_train, "unit": "h"},
        "pue": spec.pue,
        "c_region": {"value": spec.c_region, "unit": "kgCO2/kWh"},
    })


def parse_runtime_samples(text: str, file: str = "<string>") -> RuntimeSamples:
    r = _Reader(file)
    obj = r.obj(_json_loads(text, file), None, None)
    r.keys(obj, None, "", ["unit", "latencies"], ["runtime_model", "requests"])
    if obj["unit"] != "s":
        r.fail(None, "unit", f"expected unit 's', got {obj['unit']!r}")
    lat = obj["latencies"]
    if not isinstance(lat, list) or not lat:
        r.fail(None, "latencies", "expected a non-empty list of seconds")
    for i, v in enumerate(lat):
        if r.number(v, None, f"latencies[{i}]") <= 0:
            r.fail(None, f"latencies[{i}]", f"latency {v!r} must be > 0")
    model = None
    if obj.get("runtime_model") is not None:
        rm = r.obj(obj["runtime_model"], None, "runtime_model")
        r.keys(rm, None, "runtime_model", ["encode_table", "per_token"])
        table = {}
        for bucket, v in r.obj(rm["encode_table"], None, "runtime_model.encode_table").items():
            fld = f"runtime_model.encode_table.{bucket}"
            if not bucket.isdigit():
                r.fail(None, fld, "bucket keys must be non-negative integer token counts")
            table[int(bucket)] = r.number(v, None, fld)
        keys = list(table)
        if keys != sorted(set(keys)):
            r.fail(None, "runtime_model.encode_table", "bucket keys must be strictly increasing")
        per_token = r.number(rm["per_token"], None, "runtime_model.per_token")
        model = r.wrap(None, "runtime_model", lambda: RuntimeModel(table, per_token))
    reqs = []
    for i, q in enumerate(obj.get("requests", [])):
        fld = f"requests[{i}]"
        r.obj(q, None, fld)
        r.keys(q, None, fld, ["prompt_tokens", "output_tokens"])
        p = r.integer(q["prompt_tokens"], None, f"{fld}.prompt_tokens")
        o = r.integer(q["output_tokens"], None, f"{fld}.output_tokens")
        if p < 0 or o < 0:
            r.fail(None, fld, "token counts must be >= 0")
        reqs.append((p, o))
    return r.wrap(None, None, lambda: RuntimeSamples(tuple(lat), model, tuple(reqs)))


def dump_runtime_samples(samples: RuntimeSamples) -> str:
    obj: dict[str, Any] = {"unit": "s", "latencies": list(samples.latencies)}
    if samples.runtime_model is not None:
        obj["runtime_model"] = {
            "encode_table": {str(k): v for k, v in samples.runtime_model.encode_table.items()},
            "per_token": samples.runtime_model.per_token,
        }
    if samples.requests:
        obj["requests"] = [{"prompt_tokens": p, "output_tokens": o} for p, o in samples.requests]
    return _json_dumps(obj)


# -- scaling curves ----------------------------------------------------------


def parse_scaling_curve(text: str, file: str = "<string>") -> ScalingCurve:
    r = _Reader(file)
    rows = [(n, row) for n, row in _csv_rows(text) if row]
    if len(rows) < 2:
        r.fail(1, None, "expected a baseline row, a header row and data rows")
    (bl_line, bl), (hd_line, hd) = rows[0], rows[1]
    if len(bl) != 2 or bl[0] != "random_baseline":
        r.fail(bl_line, "random_baseline", "first row must be 'random_baseline,<value>'")
    baseline = r.csv_number(bl[1], bl_line, "random_baseline")
    if hd != ["scale", "performance"]:
        r.fail(hd_line, None, "second row must be the header 'scale,performance'")
    points = []
    prev = None
    for lineno, row in rows[2:]:
        if len(row) != 2:
            r.fail(lineno, None, f"expected 2 columns, got {len(row)}")
        scale = r.csv_number(row[0], lineno, "scale")
        perf = r.csv_number(row[1], lineno, "performance")
        if scale <= 0:
            r.fail(lineno, "scale", f"scale {scale!r} must be positive")
        if prev is not None and scale <= prev:
            r.fail(lineno, "scale", "scales must be strictly increasing")
        prev = scale
        points.append((scale, perf))
    return r.wrap(None, None, lambda: ScalingCurve(tuple(points), baseline))


def dump_scaling_curve(curve: ScalingCurve) -> str:
    rows = [["random_baseline", repr(curve.random_baseline)], ["scale", "performance"]]
    rows += [[repr(s), repr(p)] for s, p in curve.points]
    return _csv_text(rows)


# -- dispatch ----------------------------------------------------------------


def loads(
    text: str,
    kind: str,
    fmt: str,
    file: str = "<string>",
    meta: Optional[dict] = None,
    schema: Optional[IndicatorSchema] = None,
):
    """Parse ``text`` as a value of ``kind`` in format ``fmt``."""
    meta = meta or {}
    if fmt not in SUPPORTED_FORMATS.get(kind, ()):
        raise IngestError(file, None, None, f"unsupported kind/format pair {kind}/{fmt}")
    if kind == "score_sheet":
        if fmt == "csv":
            for key in ("rater", "entity"):
                if not meta.get(key):
                    raise IngestError(file, None, key, f"CSV score sheets need '{key}' in the manifest entry")
            return parse_score_sheet_csv(text, file, rater_id=meta["rater"], entity_id=meta["entity"],
                                         schema_name=meta.get("schema"), schema=schema)
        return parse_score_sheet_json(text, file, schema=schema, rater_id=meta.get("rater"),
                                      entity_id=meta.get("entity"), schema_name=meta.get("schema"))
    parser = {
        "prediction_log": parse_prediction_log,
        "failure_matrix": parse_failure_matrix,
        "ranked_lists": parse_ranked_lists,
        "generation_stats": parse_generation_stats,
        "schema": parse_schema,
        "hardware_spec": parse_hardware_spec,
        "runtime_samples": parse_runtime_samples,
        "scaling_curve": parse_scaling_curve,
    }[kind]
    return parser(text, file)


def dumps(value, kind: str, fmt: str, schema: Optional[IndicatorSchema] = None) -> str:
    if fmt not in SUPPORTED_FORMATS.get(kind, ()):
        raise ValueError(f"unsupported kind/format pair {kind}/{fmt}")
    if kind == "score_sheet":
        return dump_score_sheet_csv(value, schema) if fmt == "csv" else dump_score_sheet_json(value, schema)
    dumper = {
        "prediction_log": dump_prediction_log,
        "failure_matrix": dump_failure_matrix,
        "ranked_lists": dump_ranked_lists,
        "generation_stats": dump_generation_stats,
        "schema": dump_schema,
        "hardware_spec": dump_hardware_spec,
        "runtime_samples": dump_runtime_samples,
        "scaling_curve": dump_scaling_curve,
    }[kind]
    return dumper(value)


def _read_text(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IngestError(str(path), None, None, f"cannot read file: {exc.strerror or exc}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(str(path), None, None, f"not valid UTF-8 (byte offset {exc.start})") from None
    return text.removeprefix("\ufeff")


def load(entry: DatasetEntry, schema: Optional[IndicatorSchema] = None):
    """Load and validate the file behind one manifest entry."""
    return loads(_read_text(entry.path), entry.kind, entry.format, str(entry.path), entry.meta, schema)


# -- manifests and bundles ---------------------------------------------------

_ENTRY_KEYS = {"name", "kind", "path", "format"}


def load_manifest(path) -> list[DatasetEntry]:
    path = Path(path)
    file = str(path)
    r = _Reader(file)
    obj = r.obj(_json_loads(_read_text(path), file), None, None)
    r.keys(obj, None, "", ["datasets"])
    raw = obj["datasets"]
    if not isinstance(raw, list):
        r.fail(None, "datasets", "expected a list")
    entries, names = [], set()
    for i, d in enumerate(raw):
        fld = f"datasets[{i}]"
        r.obj(d, None, fld)
        for k in _ENTRY_KEYS:
            if k not in d:
                r.fail(None, f"{fld}.{k}", "missing required field")
            r.string(d[k], None, f"{fld}.{k}")
        if d["name"] in names:
            r.fail(None, f"{fld}.name", f"duplicate dataset name {d['name']!r}")
        names.add(d["name"])
        meta = {k: v for k, v in d.items() if k not in _ENTRY_KEYS}
        entries.append(r.wrap(None, fld, lambda: DatasetEntry(
            d["name"], d["kind"], (path.parent / d["path"]).resolve(), d["format"], meta)))
    return entries


@dataclass
class Bundle:
    entries: list[DatasetEntry]
    values: dict[str, Any]

    def of_kind(self, kind: str) -> list[tuple[DatasetEntry, Any]]:
        return [(e, self.values[e.name]) for e in self.entries if e.kind == kind and e.name in self.values]

    def schemas(self) -> dict[str, IndicatorSchema]:
        return {s.name: s for _, s in self.of_kind("schema")}

    def schema_for(self, sheet: ScoreSheet) -> Optional[IndicatorSchema]:
        schemas = self.schemas()
        if sheet.schema_name:
            return schemas.get(sheet.schema_name)
        if len(schemas) == 1:
            return next(iter(schemas.values()))
        return None


def load_bundle(manifest_path, executor=None) -> Bundle:
    """Load every dataset in a manifest; schemas first so sheets can be checked against them.

    ``executor`` (a ``concurrent.futures`` executor) loads files concurrently; the
    result is identical either way.
    """
    entries = load_manifest(manifest_path)
    mapper = executor.map if executor is not None else map
    values: dict[str, Any] = {}
    schema_entries = [e for e in entries if e.kind == "schema"]
    for e, v in zip(schema_entries, mapper(load, schema_entries)):
        values[e.name] = v
    schemas = {v.name: v for v in values.values()}

    def load_one(e: DatasetEntry):
        schema = None
        if e.kind == "score_sheet":
            name = e.meta.get("schema")
            schema = schemas.get(name) if name else (next(iter(schemas.values())) if len(schemas) == 1 else None)
        return load(e, schema)

    rest = [e for e in entries if e.kind != "schema"]
    for e, v in zip(rest, mapper(load_one, rest)):
        values[e.name] = v
    return Bundle(entries, values)


def validate_cross(bundle: Bundle) -> list[str]:
    """Cross-file consistency checks; returns violations (empty when consistent)."""
    violations: list[str] = []
    schemas = bundle.schemas()
    seen_sheets: dict[tuple, str] = {}
    for entry, sheet in bundle.of_kind("score_sheet"):
        if sheet.schema_name and sheet.schema_name not in schemas:
            violations.append(f"{entry.name}: references schema {sheet.schema_name!r}, which is not in the bundle")
        elif not sheet.schema_name and len(schemas) != 1:
            violations.append(f"{entry.name}: declares no schema and the bundle has {len(schemas)} schemas")
        else:
            schema = bundle.schema_for(sheet)
            try:
                sheet.check(schema)
            except ValueError as exc:
                violations.append(f"{entry.name}: {exc}")
        key = (sheet.schema_name, sheet.entity_id, sheet.rater_id, str(entry.meta.get("edition", "")))
        if key in seen_sheets:
            violations.append(
                f"{entry.name}: duplicates rater {sheet.rater_id!r} for entity {sheet.entity_id!r} "
                f"(also in {seen_sheets[key]})"
            )
        seen_sheets[key] = entry.name
    for entry, records in bundle.of_kind("prediction_log"):
        groups: dict[str, bool] = defaultdict(bool)
        for rec in records:
            groups[rec.instance_id] |= rec.is_original
        for inst, has_original in groups.items():
            if not has_original:
                violations.append(f"{entry.name}: perturbation group {inst!r} has no original variant")
    return violations
