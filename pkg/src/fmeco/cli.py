"""fmeco command line.

Exit codes: 0 success, 2 configuration error, 3 data error, 1 internal error.
Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from fmeco import __version__, pipeline
from fmeco.ingest import IngestError, load_bundle, validate_cross
from fmeco.metrics.toxicity import API_KEY_ENV, HttpToxicityScorer, MockToxicityScorer, ToxicityServiceError
from fmeco.tables import Report, to_markdown, write_report

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3
FORMATS = ("csv", "json", "md")


class ConfigError(Exception):
    pass


def _formats(text: str) -> list[str]:
    items = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in items if f not in FORMATS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be a comma list drawn from {','.join(FORMATS)}")
    return items


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--manifest", type=Path, required=True, help="dataset manifest (JSON)")
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--format", type=_formats, default=list(FORMATS), help="comma list of csv,json,md")
    common.add_argument("--precision", type=_nonneg_int, default=3, help="decimals in markdown tables")
    common.add_argument("--threads", type=_pos_int, default=1, help="worker threads for loading and analysis")
    common.add_argument("--quiet", action="store_true", help="do not echo the markdown report")

    metrics = _Parser(add_help=False)
    metrics.add_argument("--bins", type=_pos_int, default=10, help="ECE bins")
    metrics.add_argument("--coverage", type=float, default=0.1, help="selective-accuracy coverage")
    metrics.add_argument("--cutoff", type=_pos_int, default=10, help="rank cutoff for RR and NDCG")
    metrics.add_argument("--correlation", choices=("pearson", "spearman"), default="pearson")
    metrics.add_argument("--toxicity", choices=("none", "mock", "http"), default="none")
    metrics.add_argument("--toxicity-endpoint", default=None)
    metrics.add_argument("--toxicity-threshold", type=float, default=0.5)

    efficiency = _Parser(add_help=False)
    efficiency.add_argument("--percentile", type=float, default=0.0, help="denoising percentile of latencies")

    scaling = _Parser(add_help=False)
    scaling.add_argument("--near-random-tol", type=float, default=None)
    scaling.add_argument("--jump-min", type=float, default=None)

    index = _Parser(add_help=False)
    index.add_argument("--resolutions", type=Path, default=None, help="JSON with resolved disagreement scores")
    index.add_argument("--old", default=None, help="older edition for diff")
    index.add_argument("--new", default=None, help="newer edition for diff")

    parser = _Parser(prog="fmeco", description="Foundation-model ecosystem analytics.")
    parser.add_argument("--version", action="version", version=f"fmeco {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("homogenize", parents=[common], help="failure-matrix homogenization analysis")
    sub.add_parser("metrics", parents=[common, metrics], help="holistic evaluation metrics")
    sub.add_parser("efficiency", parents=[common, efficiency], help="energy, emissions and runtime")
    sub.add_parser("scaling", parents=[common, scaling], help="emergence detection on scaling curves")
    ip = sub.add_parser("index", parents=[common, index], help="composite index scoring")
    ip.add_argument("action", choices=sorted(pipeline.INDEX_ACTIONS))
    sub.add_parser("report", parents=[common, metrics, efficiency, scaling, index], help="every applicable analysis")
    return parser


def _scorer(args):
    choice = getattr(args, "toxicity", "none")
    if choice == "mock":
        return MockToxicityScorer()
    if choice == "http":
        if not args.toxicity_endpoint:
            raise ConfigError("--toxicity http requires --toxicity-endpoint")
        if not os.environ.get(API_KEY_ENV):
            raise ConfigError(f"--toxicity http requires the {API_KEY_ENV} environment variable")
        return HttpToxicityScorer(args.toxicity_endpoint)
    return None


def _options(args, mapper, out_dir: Path) -> pipeline.Options:
    coverage = getattr(args, "coverage", 0.1)
    if not 0 < coverage <= 1:
        raise ConfigError("--coverage must be in (0, 1]")
    percentile = getattr(args, "percentile", 0.0)
    if not 0 <= percentile <= 100:
        raise ConfigError("--percentile must be in [0, 100]")
    if getattr(args, "resolutions", None) is not None and not args.resolutions.is_file():
        raise ConfigError(f"resolutions file not found: {args.resolutions}")
    return pipeline.Options(
        bins=getattr(args, "bins", 10),
        coverage=coverage,
        cutoff=getattr(args, "cutoff", 10),
        correlation=getattr(args, "correlation", "pearson"),
        percentile=percentile,
        toxicity_threshold=getattr(args, "toxicity_threshold", 0.5),
        toxicity_scorer=_scorer(args),
        near_random_tol=getattr(args, "near_random_tol", None),
        jump_min=getattr(args, "jump_min", None),
        old_edition=getattr(args, "old", None),
        new_edition=getattr(args, "new", None),
        resolutions=getattr(args, "resolutions", None),
        out_dir=out_dir,
        mapper=mapper,
    )


def _run(args) -> Report:
    if not args.manifest.is_file():
        raise ConfigError(f"manifest not found: {args.manifest}")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {args.out}: {exc}") from exc
    if not os.access(args.out, os.W_OK):
        raise ConfigError(f"output directory is not writable: {args.out}")

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        mapper = pool.map if args.threads > 1 else map
        opts = _options(args, mapper, args.out)
        bundle = load_bundle(args.manifest, pool if args.threads > 1 else None)
        violations = validate_cross(bundle)
        if violations:
            raise IngestError(str(args.manifest), None, None, "; ".join(violations))
        if args.command == "homogenize":
            report = pipeline.homogenize(bundle, opts)
        elif args.command == "metrics":
            report = pipeline.metrics(bundle, opts)
        elif args.command == "efficiency":
            report = pipeline.efficiency_report(bundle, opts)
        elif args.command == "scaling":
            report = pipeline.scaling_report(bundle, opts)
        elif args.command == "index":
            report = pipeline.INDEX_ACTIONS[args.action](bundle, opts)
        else:
            report = pipeline.full_report(bundle, opts)
            checks = Report("report")
            t = checks.table("cross_validation", ["check", "violations"])
            t.add("bundle consistency", 0)
            report.extend(checks)
    write_report(report, args.out, args.format, args.precision)
    return report


def _fail(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code, **extra}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = _run(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except IngestError as exc:
        return _fail(EXIT_DATA, "data", exc.message, file=exc.file, line=exc.line, field=exc.field)
    except ToxicityServiceError as exc:
        return _fail(EXIT_INTERNAL, "toxicity_service", str(exc))
    except (ValueError, KeyError) as exc:
        return _fail(EXIT_DATA, "data", str(exc))
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_INTERNAL, "internal", f"{type(exc).__name__}: {exc}")
    if not args.quiet:
        sys.stdout.write(to_markdown(report, args.precision))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
