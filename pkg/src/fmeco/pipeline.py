"""Turn a loaded dataset bundle into report tables, one function per subcommand.

Every function is deterministic: rows are ordered by dataset, scenario,
model or entity keys, never by completion order of parallel work.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from fmeco import efficiency, homogenization, scaling
from fmeco import metrics as M
from fmeco.index import aggregation as agg
from fmeco.index import agreement
from fmeco.index.schema import NOT_APPLICABLE, IndicatorSchema, ScoreSheet
from fmeco.ingest import Bundle, DatasetEntry, dump_score_sheet_csv
from fmeco.metrics.classification import originals
from fmeco.metrics.text import tokenize
from fmeco.metrics.toxicity import ToxicityScorer
from fmeco.tables import Report

DEFAULT_SCENARIO = "default"
DEFAULT_MODEL = "default"


@dataclass
class Options:
    bins: int = 10
    coverage: float = 0.1
    cutoff: int = 10
    correlation: str = "pearson"
    percentile: float = 0.0
    toxicity_threshold: float = 0.5
    toxicity_scorer: Optional[ToxicityScorer] = None
    near_random_tol: Optional[float] = None
    jump_min: Optional[float] = None
    old_edition: Optional[str] = None
    new_edition: Optional[str] = None
    resolutions: Optional[Path] = None
    out_dir: Optional[Path] = None
    mapper: Callable = map
    extra: dict = field(default_factory=dict)


def _scenario(e: DatasetEntry) -> str:
    return str(e.meta.get("scenario", DEFAULT_SCENARIO))


def _model(e: DatasetEntry) -> str:
    return str(e.meta.get("model", DEFAULT_MODEL))


# -- homogenization ----------------------------------------------------------


def _matrices_from_logs(bundle: Bundle, report: Report) -> list[tuple[str, homogenization.FailureMatrix]]:
    """One failure matrix per scenario whose model logs cover the same original instances."""
    by_scenario: dict[str, list[tuple[str, Any]]] = defaultdict(list)
    for entry, records in bundle.of_kind("prediction_log"):
        by_scenario[_scenario(entry)].append((_model(entry), records))
    out = []
    for scenario in sorted(by_scenario):
        logs = sorted(by_scenario[scenario], key=lambda x: x[0])
        if len(logs) < 2:
            continue
        models = [m for m, _ in logs]
        if len(set(models)) != len(models):
            report.note(f"homogenization {scenario}", "skipped: duplicate model names")
            continue
        gold: dict[str, Any] = {}
        preds: dict[str, dict[str, Any]] = {}
        consistent = True
        for model, records in logs:
            orig = {r.instance_id: r for r in originals(records)}
            if not gold:
                gold = {i: r.gold for i, r in sorted(orig.items())}
            if set(orig) != set(gold) or any(orig[i].gold != gold[i] for i in gold):
                consistent = False
                break
            preds[model] = {i: r.predicted for i, r in orig.items()}
        if not consistent or not gold:
            report.note(f"homogenization {scenario}", "skipped: models were not evaluated on identical instances")
            continue
        matrix = homogenization.from_predictions(gold, preds)
        if matrix.cells.min() == matrix.cells.max():
            report.note(f"homogenization {scenario}", "skipped: every model has the same outcome on every instance")
            continue
        out.append((f"scenario:{scenario}", matrix))
    return out


def homogenize(bundle: Bundle, opts: Options) -> Report:
    report = Report("homogenize")
    summary = report.table("homogenization_summary", [
        "dataset", "instances", "models", "systemic_failure_rate",
        "excess_at_0_failures", "excess_at_k_failures", "tv_observed_vs_baseline",
    ])
    rates = report.table("homogenization_rates", ["dataset", "position", "model", "failure_rate"])
    dist = report.table("homogenization_distribution", ["dataset", "failures", "observed", "baseline", "excess"])
    matrices = [(e.name, m) for e, m in bundle.of_kind("failure_matrix")]
    matrices += _matrices_from_logs(bundle, report)
    if not matrices:
        report.note("homogenization", "skipped: no failure matrices or multi-model scenarios")
    for name, res in zip([n for n, _ in matrices], opts.mapper(homogenization.analyze, [m for _, m in matrices])):
        m = dict(matrices)[name]
        summary.add(name, m.n_instances, m.n_models, res.systemic_failure_rate,
                    res.endpoint_excess[0], res.endpoint_excess[1],
                    homogenization.total_variation(res.observed, res.baseline))
        for pos, (model, rate) in enumerate(zip(res.model_ids, res.failure_rates), start=1):
            rates.add(name, pos, model, rate)
        for row in res.rows():
            dist.add(name, row["failures"], row["observed"], row["baseline"], row["excess"])
    return report


# -- metrics -----------------------------------------------------------------


def _texts(records) -> bool:
    return all(isinstance(r.gold, str) and isinstance(r.predicted, str) for r in records)


def _free_text(records) -> bool:
    """Overlap metrics only mean something when references run to more than one token."""
    return _texts(records) and any(len(tokenize(r.gold)) > 1 for r in records)


def _log_metrics(args):
    entry, records, opts = args
    orig = originals(records)
    row: dict[str, Any] = {"n": len(orig), "accuracy": M.accuracy(orig) if orig else None}
    notes = []
    if M.has_confidences(orig) and len(orig) >= opts.bins:
        row["ece"] = M.ece(orig, opts.bins)
        row["selective_accuracy"] = M.selective_accuracy(orig, opts.coverage)
        row["coverage_auc"] = M.coverage_accuracy_auc(orig)
        row["curve"] = M.coverage_accuracy_curve(orig)
    else:
        row.update(ece=None, selective_accuracy=None, coverage_auc=None, curve=[])
        reason = "no confidences" if not M.has_confidences(orig) else f"fewer than {opts.bins} records"
        notes.append(("calibration", f"skipped: {reason}"))
    if any(not r.is_original for r in records):
        row["worst_case_accuracy"] = M.worst_case_accuracy(records)
    else:
        row["worst_case_accuracy"] = None
        notes.append(("robustness", "skipped: no perturbations"))
    if orig and _free_text(orig):
        row["token_f1"] = sum(M.token_f1(r.gold, r.predicted) for r in orig) / len(orig)
        row["rouge_2"] = sum(M.rouge_2(r.gold, r.predicted) for r in orig) / len(orig)
    else:
        row["token_f1"] = row["rouge_2"] = None
    row["disparities"] = {
        tag: (sum(tag in r.group_tags for r in orig), acc)
        for tag, acc in M.performance_disparities(orig).items()
    }
    if opts.toxicity_scorer is not None and _texts(orig) and orig:
        scores = opts.toxicity_scorer.score([str(r.predicted) for r in orig])
        row["toxicity_rate"] = M.toxicity_rate(scores, opts.toxicity_threshold)
    else:
        row["toxicity_rate"] = None
    return row, notes


WIN_RATE_METRICS = [("accuracy", True), ("ece", False), ("worst_case_accuracy", True), ("toxicity_rate", False)]
CORRELATION_PAIRS = [("accuracy", "ece"), ("accuracy", "worst_case_accuracy"), ("accuracy", "coverage_auc")]


def metrics(bundle: Bundle, opts: Options, include_curves: bool = True) -> Report:
    report = Report("metrics")
    logs = sorted(bundle.of_kind("prediction_log"), key=lambda ev: (_scenario(ev[0]), _model(ev[0]), ev[0].name))
    summary = report.table("metrics_summary", [
        "scenario", "model", "dataset", "instances", "accuracy", "ece", "selective_accuracy",
        "coverage_auc", "worst_case_accuracy", "token_f1", "rouge_2", "toxicity_rate",
    ])
    disparities = report.table("metrics_disparities", ["scenario", "model", "group", "instances", "accuracy"])
    curve = report.table("coverage_accuracy_curve", ["scenario", "model", "coverage", "accuracy"]) if include_curves else None
    results = list(opts.mapper(_log_metrics, [(e, recs, opts) for e, recs in logs]))
    table: dict[str, dict[str, dict[str, Any]]] = defaultdict(lambda: defaultdict(dict))
    seen_notes = set()
    for (entry, _), (row, notes) in zip(logs, results):
        sc, mo = _scenario(entry), _model(entry)
        summary.add(sc, mo, entry.name, row["n"], row["accuracy"], row["ece"], row["selective_accuracy"],
                    row["coverage_auc"], row["worst_case_accuracy"], row["token_f1"], row["rouge_2"],
                    row["toxicity_rate"])
        for tag, (n, acc) in row["disparities"].items():
            disparities.add(sc, mo, tag, n, acc)
        if curve is not None:
            for c, acc in row["curve"]:
                curve.add(sc, mo, c, acc)
        for section, status in notes:
            if (entry.name, section) not in seen_notes:
                seen_notes.add((entry.name, section))
                report.note(f"{section} ({entry.name})", status)
        for metric, _ in WIN_RATE_METRICS + [("coverage_auc", True)]:
            table[metric][mo][sc] = row.get(metric)
    if not logs:
        report.note("metrics", "skipped: no prediction logs")
    elif opts.toxicity_scorer is None:
        report.note("toxicity", "skipped: no scorer configured")

    models = sorted({_model(e) for e, _ in logs})
    wins = report.table("win_rates", ["metric", "model", "win_rate"])
    if len(models) >= 2:
        for metric, higher in WIN_RATE_METRICS:
            scores = {m: table[metric].get(m, {}) for m in models}
            if not any(v is not None for s in scores.values() for v in s.values()):
                continue
            for model, rate in M.head_to_head_win_rates(scores, higher).items():
                wins.add(metric, model, rate)
    else:
        report.note("win rates", "skipped: fewer than two models")

    corr = report.table("metric_correlations", ["metric_a", "metric_b", "method", "scenario", "coefficient"])
    for a, b in CORRELATION_PAIRS:
        by_scenario = lambda metric: {
            sc: {m: table[metric][m].get(sc) for m in models} for sc in sorted({_scenario(e) for e, _ in logs})
        }
        per, mean = M.metric_correlation(by_scenario(a), by_scenario(b), opts.correlation)
        if all(v is None for v in per.values()):
            continue
        for sc, v in per.items():
            corr.add(a, b, opts.correlation, sc, v)
        corr.add(a, b, opts.correlation, "*mean*", mean)

    ir = report.table("retrieval", ["scenario", "model", "dataset", "queries", f"rr_at_{opts.cutoff}", f"ndcg_at_{opts.cutoff}"])
    for entry, lists in sorted(bundle.of_kind("ranked_lists"), key=lambda ev: (_scenario(ev[0]), _model(ev[0]), ev[0].name)):
        if not lists:
            continue
        rr = sum(M.reciprocal_rank(rl, opts.cutoff) for rl in lists) / len(lists)
        nd = sum(M.ndcg(rl, opts.cutoff) for rl in lists) / len(lists)
        ir.add(_scenario(entry), _model(entry), entry.name, len(lists), rr, nd)

    bias = report.table("bias", ["scenario", "model", "dataset", "representation_bias", "association_bias"])
    for entry, stats in sorted(bundle.of_kind("generation_stats"), key=lambda ev: (_scenario(ev[0]), _model(ev[0]), ev[0].name)):
        ref = entry.meta.get("reference")
        bias.add(_scenario(entry), _model(entry), entry.name,
                 M.representation_bias(stats, ref), M.association_bias(stats, ref))
    return report


# -- efficiency --------------------------------------------------------------


def efficiency_report(bundle: Bundle, opts: Options) -> Report:
    report = Report("efficiency")
    train = report.table("efficiency_training", [
        "dataset", "n_gpu", "w_gpu_kW", "t_train_h", "pue", "c_region_kgCO2_per_kWh", "energy_kWh", "emissions_kgCO2",
    ])
    for entry, spec in bundle.of_kind("hardware_spec"):
        energy = efficiency.training_energy(spec)
        train.add(entry.name, spec.n_gpu, spec.w_gpu, spec.t_train, spec.pue, spec.c_region,
                  energy, efficiency.training_emissions(energy, spec.c_region))
    runtime = report.table("efficiency_runtime", ["dataset", "samples", "percentile", "denoised_runtime_s"])
    requests = report.table("efficiency_requests", [
        "dataset", "request", "prompt_tokens", "output_tokens", "idealized_runtime_s", "prompt_exceeds_largest_bucket",
    ])
    for entry, samples in bundle.of_kind("runtime_samples"):
        runtime.add(entry.name, len(samples.latencies), opts.percentile,
                    efficiency.denoised_runtime(samples.latencies, opts.percentile))
        if samples.requests and samples.runtime_model is None:
            report.note(f"idealized runtime ({entry.name})", "skipped: no runtime model")
            continue
        for i, (p, o) in enumerate(samples.requests, start=1):
            secs, exceeded = efficiency.idealized_runtime(p, o, samples.runtime_model)
            requests.add(entry.name, i, p, o, secs, exceeded)
    if not bundle.of_kind("hardware_spec") and not bundle.of_kind("runtime_samples"):
        report.note("efficiency", "skipped: no hardware specs or runtime samples")
    return report


# -- scaling -----------------------------------------------------------------


def scaling_report(bundle: Bundle, opts: Options) -> Report:
    report = Report("scaling")
    t = report.table("emergence", ["dataset", "points", "random_baseline", "near_random_tol", "jump_min",
                                   "verdict", "threshold_scale"])
    for entry, curve in bundle.of_kind("scaling_curve"):
        eps = opts.near_random_tol if opts.near_random_tol is not None else entry.meta.get("near_random_tol")
        delta = opts.jump_min if opts.jump_min is not None else entry.meta.get("jump_min")
        if eps is None or delta is None:
            report.note(f"emergence ({entry.name})", "skipped: near_random_tol and jump_min must both be given")
            continue
        verdict = scaling.detect_emergence(curve, float(eps), float(delta))
        t.add(entry.name, len(curve.points), curve.random_baseline, float(eps), float(delta),
              verdict.label, verdict.threshold_scale)
    if not bundle.of_kind("scaling_curve"):
        report.note("emergence", "skipped: no scaling curves")
    return report


# -- composite index ---------------------------------------------------------


@dataclass
class SheetRef:
    entry: DatasetEntry
    sheet: ScoreSheet
    schema: IndicatorSchema

    @property
    def edition(self) -> str:
        return str(self.entry.meta.get("edition", "default"))

    @property
    def group(self) -> tuple[str, str, str]:
        return (self.schema.name, self.edition, self.sheet.entity_id)


def _sheets(bundle: Bundle) -> list[SheetRef]:
    refs = []
    for entry, sheet in bundle.of_kind("score_sheet"):
        schema = bundle.schema_for(sheet)
        if schema is None:
            raise ValueError(f"{entry.name}: no schema available for score sheet")
        refs.append(SheetRef(entry, sheet, schema))
    return sorted(refs, key=lambda r: (*r.group, r.sheet.rater_id, r.entry.name))


def _by_group(refs: list[SheetRef]) -> dict[tuple, list[SheetRef]]:
    out: dict[tuple, list[SheetRef]] = defaultdict(list)
    for r in refs:
        out[r.group].append(r)
    return dict(sorted(out.items()))


def final_sheets(bundle: Bundle, report: Report) -> list[SheetRef]:
    """The sheet of record per (schema, edition, entity): flagged final, or the only sheet."""
    finals = []
    for group, refs in _by_group(_sheets(bundle)).items():
        flagged = [r for r in refs if r.entry.meta.get("final")]
        if len(flagged) == 1:
            finals.append(flagged[0])
        elif len(flagged) > 1:
            raise ValueError(f"entity {group[2]!r} ({group[0]}, {group[1]}) has several sheets marked final")
        elif len(refs) == 1:
            finals.append(refs[0])
        else:
            report.note(f"index {group[0]}/{group[1]}/{group[2]}",
                        f"no final sheet among {len(refs)} rater sheets; run 'index resolve'")
    return finals


def index_score(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-score")
    t = report.table("index_sheet_scores", ["schema", "edition", "entity", "rater", "level", "points", "max", "fraction"])
    for ref in _sheets(bundle):
        res = agg.aggregate(ref.sheet, ref.schema)
        _emit_levels(t, res, (ref.schema.name, ref.edition, ref.sheet.entity_id, ref.sheet.rater_id))
    return report


def _emit_levels(t, res: agg.AggregateReport, prefix: tuple) -> None:
    t.add(*prefix, "overall", res.overall, res.overall_max, res.fraction)
    for d, s in res.per_domain.items():
        t.add(*prefix, f"domain:{d}", s.points, s.max, s.fraction)
    for d, s in res.per_subdomain.items():
        t.add(*prefix, f"subdomain:{d}", s.points, s.max, s.fraction)


def index_agree(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-agree")
    t = report.table("index_agreement", ["schema", "edition", "entity", "rater_a", "rater_b",
                                         "common_indicators", "disagreements", "agreement_rate", "cohens_kappa"])
    pooled: dict[tuple, list] = defaultdict(list)
    for (schema, edition, entity), refs in _by_group(_sheets(bundle)).items():
        raters = [r for r in refs if not r.entry.meta.get("final")]
        for i, a in enumerate(raters):
            for b in raters[i + 1 :]:
                common = len(set(a.sheet.scores) & set(b.sheet.scores))
                if not common:
                    report.note(f"agreement {entity}", f"skipped: {a.sheet.rater_id} and {b.sheet.rater_id} share no scored indicators")
                    continue
                t.add(schema, edition, entity, a.sheet.rater_id, b.sheet.rater_id, common,
                      len(agreement.disagreements(a.sheet, b.sheet)),
                      agreement.agreement_rate(a.sheet, b.sheet), agreement.cohens_kappa(a.sheet, b.sheet))
                pooled[(schema, edition)].append((a.sheet, b.sheet))
    for (schema, edition), pairs in sorted(pooled.items()):
        n = sum(len(set(a.scores) & set(b.scores)) for a, b in pairs)
        dis = sum(sum(a.scores[i] != b.scores[i] for i in set(a.scores) & set(b.scores)) for a, b in pairs)
        t.add(schema, edition, "*pooled*", "", "", n, dis,
              agreement.pooled_agreement(pairs), agreement.pooled_kappa(pairs))
    if not pooled:
        report.note("agreement", "skipped: no entity has two rater sheets")
    return report


def _load_resolutions(path: Path) -> dict[tuple[str, str], dict]:
    data = json.loads(path.read_text(encoding="utf-8"))
    out = {}
    for item in data.get("resolutions", []):
        out[(str(item.get("edition", "default")), item["entity"])] = item.get("scores", {})
    return out


def index_resolve(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-resolve")
    resolutions = _load_resolutions(opts.resolutions) if opts.resolutions else {}
    t = report.table("index_resolved", ["schema", "edition", "entity", "rater_a", "rater_b", "resolved", "file"])
    for (schema, edition, entity), refs in _by_group(_sheets(bundle)).items():
        raters = [r for r in refs if not r.entry.meta.get("final")]
        if len(raters) != 2:
            continue
        a, b = raters
        res = resolutions.get((edition, entity), {})
        final = agreement.resolve(a.sheet, b.sheet, res)
        fname = f"resolved_{schema}_{edition}_{entity}.csv".replace("/", "_").replace(" ", "_")
        if opts.out_dir is not None:
            (opts.out_dir / "resolved").mkdir(parents=True, exist_ok=True)
            (opts.out_dir / "resolved" / fname).write_bytes(dump_score_sheet_csv(final, a.schema).encode("utf-8"))
        t.add(schema, edition, entity, a.sheet.rater_id, b.sheet.rater_id, len(res), f"resolved/{fname}")
    if not t.rows:
        report.note("resolve", "skipped: no entity has exactly two rater sheets")
    return report


def _final_reports(bundle: Bundle, report: Report):
    finals = final_sheets(bundle, report)
    return finals, {id(r): agg.aggregate(r.sheet, r.schema) for r in finals}


def index_aggregate(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-aggregate")
    t = report.table("index_aggregate", ["schema", "edition", "entity", "level", "points", "max", "fraction"])
    split = report.table("index_new_information", ["schema", "edition", "entity", "preexisting_points", "new_points", "overall"])
    finals, reports = _final_reports(bundle, report)
    for ref in finals:
        res = reports[id(ref)]
        _emit_levels(t, res, (ref.schema.name, ref.edition, ref.sheet.entity_id))
        old, new = agg.new_information_split(ref.sheet, ref.schema)
        split.add(ref.schema.name, ref.edition, ref.sheet.entity_id, old, new, res.overall)
    return report


def index_correlate(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-correlate")
    t = report.table("index_smc", ["schema", "edition", "scope", "entity_a", "entity_b", "smc"])
    groups: dict[tuple, list[SheetRef]] = defaultdict(list)
    for ref in final_sheets(bundle, report):
        groups[(ref.schema.name, ref.edition)].append(ref)
    for (schema_name, edition), refs in sorted(groups.items()):
        if len(refs) < 2:
            continue
        schema = refs[0].schema
        sheets = [r.sheet for r in refs]
        for scope in [None, *schema.domains]:
            matrix = agg.smc_matrix(sheets, schema, scope)
            for a in matrix:
                for b in matrix[a]:
                    t.add(schema_name, edition, scope or "all", a, b, matrix[a][b])
    if not t.rows:
        report.note("correlation", "skipped: fewer than two final sheets per schema and edition")
    return report


def index_cohorts(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-cohorts")
    t = report.table("index_cohorts", ["schema", "edition", "cohort", "level", "entities", "mean", "median"])
    finals, reports = _final_reports(bundle, report)
    groups: dict[tuple, list[SheetRef]] = defaultdict(list)
    for ref in finals:
        if ref.entry.meta.get("cohort") is not None:
            groups[(ref.schema.name, ref.edition)].append(ref)
    for (schema, edition), refs in sorted(groups.items()):
        by_entity = {r.sheet.entity_id: reports[id(r)] for r in refs}
        grouping = {r.sheet.entity_id: str(r.entry.meta["cohort"]) for r in refs}
        for cohort, levels in agg.group_compare(by_entity, grouping).items():
            for level, stat in levels.items():
                t.add(schema, edition, cohort, level, stat.n, stat.mean, stat.median)
    if not groups:
        report.note("cohorts", "skipped: no final sheet carries a cohort")
    return report


def index_diff(bundle: Bundle, opts: Options) -> Report:
    report = Report("index-diff")
    t = report.table("index_diff", ["schema", "old_edition", "new_edition", "entity", "level", "delta"])
    finals, reports = _final_reports(bundle, report)
    by_schema: dict[str, dict[str, dict[str, agg.AggregateReport]]] = defaultdict(lambda: defaultdict(dict))
    for ref in finals:
        by_schema[ref.schema.name][ref.edition][ref.sheet.entity_id] = reports[id(ref)]
    for schema, editions in sorted(by_schema.items()):
        names = sorted(editions)
        old = opts.old_edition or (names[0] if len(names) >= 2 else None)
        new = opts.new_edition or (names[-1] if len(names) >= 2 else None)
        if old is None or new is None or old == new or old not in editions or new not in editions:
            report.note(f"diff {schema}", "skipped: needs two distinct editions")
            continue
        try:
            diff = agg.longitudinal_diff(editions[old], editions[new])
        except ValueError as exc:
            report.note(f"diff {schema}", f"skipped: {exc}")
            continue
        for entity, deltas in diff.per_entity.items():
            for level, d in deltas.items():
                t.add(schema, old, new, entity, level, d)
        for level, m in diff.mean.items():
            t.add(schema, old, new, "*mean*", level, m)
    if not by_schema:
        report.note("diff", "skipped: no final sheets")
    return report


INDEX_ACTIONS = {
    "score": index_score,
    "agree": index_agree,
    "resolve": index_resolve,
    "aggregate": index_aggregate,
    "correlate": index_correlate,
    "cohorts": index_cohorts,
    "diff": index_diff,
}


def full_report(bundle: Bundle, opts: Options) -> Report:
    report = Report("report")
    for part in (homogenize(bundle, opts), metrics(bundle, opts), efficiency_report(bundle, opts)):
        report.extend(part)
    if bundle.of_kind("score_sheet"):
        for action in ("score", "agree", "aggregate", "correlate", "cohorts", "diff"):
            report.extend(INDEX_ACTIONS[action](bundle, opts))
    else:
        report.note("index", "skipped: no score sheets")
    report.extend(scaling_report(bundle, opts))
    return report
