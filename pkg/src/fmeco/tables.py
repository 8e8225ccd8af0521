"""Report tables and their CSV / JSON / markdown emitters.

Values stay unrounded until a human-readable table is rendered: CSV and JSON
carry full precision, markdown rounds to the requested number of decimals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

MISSING = "missing"


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    title: str = ""

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))


@dataclass
class Report:
    command: str
    tables: list[Table] = field(default_factory=list)
    notes: list[tuple[str, str]] = field(default_factory=list)

    def table(self, name: str, columns: Sequence[str], title: str = "") -> Table:
        t = Table(name, list(columns), title=title or name.replace("_", " "))
        self.tables.append(t)
        return t

    def note(self, section: str, status: str) -> None:
        self.notes.append((section, status))

    def extend(self, other: "Report") -> None:
        self.tables.extend(other.tables)
        self.notes.extend(other.notes)


def _machine(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _csv_cell(v) -> str:
    v = _machine(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _human(v, precision: int) -> str:
    v = _machine(v)
    if v is None:
        return MISSING
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if abs(v) >= 1e6:
            return f"{v:.{precision}e}"
        text = f"{v:.{precision}f}"
        return "0" + text[2:] if text.startswith("-0") and float(text) == 0 else text
    return str(v).replace("|", "\\|")


def to_csv(table: Table) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def to_json(report: Report) -> str:
    obj = {
        "command": report.command,
        "notes": [{"section": s, "status": st} for s, st in report.notes],
        "tables": {
            t.name: [dict(zip(t.columns, (_machine(v) for v in row))) for row in t.rows]
            for t in report.tables
        },
    }
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def to_markdown(report: Report, precision: int = 3) -> str:
    out = [f"# fmeco {report.command}", ""]
    if report.notes:
        out += ["## notes", ""]
        out += [f"- {s}: {st}" for s, st in report.notes]
        out.append("")
    for t in report.tables:
        out += [f"## {t.title}", ""]
        out.append("| " + " | ".join(t.columns) + " |")
        out.append("|" + "|".join("---" for _ in t.columns) + "|")
        for row in t.rows:
            out.append("| " + " | ".join(_human(v, precision) for v in row) + " |")
        out.append("")
    return "\n".join(out)


def write_report(report: Report, out_dir: Path, formats: Iterable[str], precision: int = 3) -> list[Path]:
    """Write the report in each requested format and return the paths written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(path: Path, text: str):
        path.write_bytes(text.encode("utf-8"))
        written.append(path)

    formats = set(formats)
    if "csv" in formats:
        for t in report.tables:
            emit(out_dir / f"{t.name}.csv", to_csv(t))
    if "json" in formats:
        emit(out_dir / f"{report.command}.json", to_json(report))
    if "md" in formats:
        emit(out_dir / f"{report.command}.md", to_markdown(report, precision))
    return written
