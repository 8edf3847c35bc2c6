"""Experiment matrix (model x training database), derived metric tables,
the two hypothesis batteries, and rendering to CSV / JSON / Markdown.

Matrix CSV header: ``model,version,database,tp,fp,fn,map_pct``; ``map_pct``
may be blank per row or the column may be absent.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import AxleEvalError, MatrixError
from .matching import ConfusionCounts
from .metrics import MetricsRow, metrics_row
from .stats import Sample, UTestOutcome, mann_whitney_test

MATRIX_COLUMNS = ("model", "version", "database", "tp", "fp", "fn", "map_pct")
FORMATS = ("csv", "json", "markdown")


@dataclass(frozen=True)
class MatrixRow:
    model: str
    version: str
    database: str
    counts: ConfusionCounts
    map_pct: float | None = None


@dataclass(frozen=True)
class ExperimentMatrix:
    """Rows keyed by (model, database).

    ``databases``, ``models`` and ``versions`` keep first-appearance order,
    which fixes the orientation (first/second sample) of every comparison.
    """

    rows: tuple[MatrixRow, ...]
    model_version: dict[str, str] = field(init=False)
    databases: tuple[str, ...] = field(init=False)
    models: tuple[str, ...] = field(init=False)
    versions: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        model_version: dict[str, str] = {}
        seen = set()
        for row in self.rows:
            key = (row.model, row.database)
            if key in seen:
                raise MatrixError(f"duplicate row for model {row.model!r} on database {row.database!r}")
            seen.add(key)
            if not row.version:
                raise MatrixError(f"model {row.model!r} has no version tag")
            if model_version.setdefault(row.model, row.version) != row.version:
                raise MatrixError(f"model {row.model!r} tagged with two versions")
        object.__setattr__(self, "model_version", model_version)
        object.__setattr__(self, "databases", tuple(dict.fromkeys(r.database for r in self.rows)))
        object.__setattr__(self, "models", tuple(model_version))
        object.__setattr__(self, "versions", tuple(dict.fromkeys(model_version.values())))

    @property
    def has_map(self) -> bool:
        return bool(self.rows) and all(r.map_pct is not None for r in self.rows)

    def row(self, model: str, database: str) -> MatrixRow:
        for r in self.rows:
            if r.model == model and r.database == database:
                return r
        raise KeyError((model, database))


def _parse_int(value: str, column: str, lineno: int) -> int:
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise MatrixError(f"line {lineno}: column {column!r} must be an integer, got {value!r}") from None
    if number < 0:
        raise MatrixError(f"line {lineno}: column {column!r} must be non-negative")
    return number


def parse_matrix(text: str, source: str = "<matrix>") -> ExperimentMatrix:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in MATRIX_COLUMNS[:-1] if c not in header]
    if missing:
        raise MatrixError(f"{source}: missing column(s) {', '.join(missing)}; expected header {','.join(MATRIX_COLUMNS)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if None in rec or any(v is None for v in rec.values()):
            raise MatrixError(f"{source}: line {lineno}: wrong number of fields")
        model, version, database = (rec[c].strip() for c in ("model", "version", "database"))
        if not model or not database:
            raise MatrixError(f"{source}: line {lineno}: model and database must be non-empty")
        counts = ConfusionCounts(*(_parse_int(rec[c], c, lineno) for c in ("tp", "fp", "fn")))
        raw_map = (rec.get("map_pct") or "").strip()
        map_pct = None
        if raw_map:
            try:
                map_pct = float(raw_map)
            except ValueError:
                raise MatrixError(f"{source}: line {lineno}: map_pct must be a number, got {raw_map!r}") from None
            if not 0 <= map_pct <= 100:
                raise MatrixError(f"{source}: line {lineno}: map_pct outside [0, 100]")
        rows.append(MatrixRow(model, version, database, counts, map_pct))
    try:
        return ExperimentMatrix(tuple(rows))
    except MatrixError as exc:
        raise MatrixError(f"{source}: {exc}") from None


def load_matrix(path: str | os.PathLike) -> ExperimentMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixError(f"cannot read matrix {path}: {exc}") from None
    return parse_matrix(text, str(path))


def matrix_to_csv(m: ExperimentMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MATRIX_COLUMNS)
    for r in m.rows:
        writer.writerow([r.model, r.version, r.database, r.counts.tp, r.counts.fp, r.counts.fn,
                         "" if r.map_pct is None else f"{r.map_pct:.2f}"])
    return buf.getvalue()


@dataclass(frozen=True)
class MetricsEntry:
    model: str
    version: str
    database: str
    counts: ConfusionCounts
    metrics: MetricsRow


def _ordered_rows(m: ExperimentMatrix) -> list[MatrixRow]:
    db_rank = {d: i for i, d in enumerate(m.databases)}
    model_rank = {mod: i for i, mod in enumerate(m.models)}
    return sorted(m.rows, key=lambda r: (db_rank[r.database], model_rank[r.model]))


def derive_metric_table(m: ExperimentMatrix) -> list[MetricsEntry]:
    """Recall/precision/F1 recomputed from counts; mAP passed through."""
    return [
        MetricsEntry(r.model, r.version, r.database, r.counts, metrics_row(r.counts, r.map_pct))
        for r in _ordered_rows(m)
    ]


def _require_complete(m: ExperimentMatrix) -> None:
    if not m.rows:
        raise MatrixError("experiment matrix is empty")
    if not m.has_map:
        absent = [f"{r.model}/{r.database}" for r in m.rows if r.map_pct is None]
        raise MatrixError(f"mAP column required for hypothesis tests; missing for {', '.join(absent[:5])}"
                          + (" ..." if len(absent) > 5 else ""))
    present = {(r.model, r.database) for r in m.rows}
    gaps = [(mod, db) for db in m.databases for mod in m.models if (mod, db) not in present]
    if gaps:
        raise MatrixError(f"unbalanced matrix: no result for {gaps[0][0]!r} on {gaps[0][1]!r}")


def _pairwise(groups: dict[str, list[float]], alpha: float) -> list[UTestOutcome]:
    samples = [Sample(label, tuple(values)) for label, values in groups.items()]
    return [mann_whitney_test(a, b, alpha) for a, b in itertools.combinations(samples, 2)]


def _check_order(order: Sequence[str] | None, available: Sequence[str], what: str) -> list[str]:
    if order is None:
        return list(available)
    order = list(order)
    if sorted(order) != sorted(available):
        raise MatrixError(f"{what} order {order} does not match the matrix's {what}s {list(available)}")
    return order


def database_hypothesis_battery(m: ExperimentMatrix, alpha: float = 0.05,
                                order: Sequence[str] | None = None) -> list[UTestOutcome]:
    """Compare the mAP samples of every pair of training databases.

    Each sample holds one database's mAP values across all models.
    """
    _require_complete(m)
    if len(m.databases) < 2:
        raise MatrixError("database comparison needs at least two databases")
    groups = {db: [r.map_pct for r in m.rows if r.database == db]
              for db in _check_order(order, m.databases, "database")}
    return _pairwise(groups, alpha)


def version_hypothesis_battery(m: ExperimentMatrix, alpha: float = 0.05,
                               order: Sequence[str] | None = None) -> list[UTestOutcome]:
    """Compare the mAP samples of every pair of model versions.

    Each sample pools one version's models over all databases (3 sizes x 3
    databases = 9 values for the shipped experiment).
    """
    _require_complete(m)
    if len(m.versions) < 2:
        raise MatrixError("version comparison needs at least two model versions")
    per_version = {v: sum(1 for mv in m.model_version.values() if mv == v) for v in m.versions}
    if len(set(per_version.values())) != 1:
        raise MatrixError(f"unbalanced matrix: models per version differ {per_version}")
    groups = {v: [r.map_pct for r in m.rows if m.model_version[r.model] == v]
              for v in _check_order(order, m.versions, "version")}
    return _pairwise(groups, alpha)


@dataclass(frozen=True)
class Report:
    metrics: tuple[MetricsEntry, ...] = ()
    database_tests: tuple[UTestOutcome, ...] = ()
    version_tests: tuple[UTestOutcome, ...] = ()


def build_report(m: ExperimentMatrix, alpha: float = 0.05,
                 database_order: Sequence[str] | None = None,
                 version_order: Sequence[str] | None = None) -> Report:
    """Metric table plus both batteries; batteries are skipped when mAP is absent."""
    metrics = tuple(derive_metric_table(m))
    if not m.has_map:
        return Report(metrics)
    return Report(
        metrics,
        tuple(database_hypothesis_battery(m, alpha, database_order)),
        tuple(version_hypothesis_battery(m, alpha, version_order)),
    )


def format_u(u: float) -> str:
    return str(int(u)) if float(u).is_integer() else f"{u:.1f}"


def _u_json(u: float):
    return int(u) if float(u).is_integer() else round(u, 1)


def _metrics_record(e: MetricsEntry) -> dict:
    return {
        "model": e.model,
        "version": e.version,
        "database": e.database,
        "tp": e.counts.tp,
        "fp": e.counts.fp,
        "fn": e.counts.fn,
        "recall_pct": e.metrics.recall_pct,
        "precision_pct": e.metrics.precision_pct,
        "f1_pct": e.metrics.f1_pct,
        "map_pct": e.metrics.map_pct,
        "degenerate": list(e.metrics.degenerate),
    }


def _test_record(t: UTestOutcome) -> dict:
    return {
        "label_a": t.label_a,
        "label_b": t.label_b,
        "n1": t.n1,
        "n2": t.n2,
        "u1": _u_json(t.u1),
        "u2": _u_json(t.u2),
        "u": _u_json(t.u),
        "p_two_tailed": t.p_two_tailed,
        "p_method": t.p_method,
        "critical_value": t.critical_value,
        "alpha": t.alpha,
        "decision": t.decision.value,
    }


_PCT_NUMBER = re.compile(r'("\w+_pct": )(-?\d+(?:\.\d+)?)')


def _render_json(report: Report) -> str:
    doc = {
        "metrics": [_metrics_record(e) for e in report.metrics],
        "database_tests": [_test_record(t) for t in report.database_tests],
        "version_tests": [_test_record(t) for t in report.version_tests],
    }
    text = json.dumps(doc, indent=2)
    return _PCT_NUMBER.sub(lambda mo: f"{mo.group(1)}{float(mo.group(2)):.2f}", text) + "\n"


def _pct(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


METRIC_HEADER = ("database", "model", "version", "tp", "fp", "fn",
                 "recall_pct", "precision_pct", "f1_pct", "map_pct", "degenerate")
TEST_HEADER = ("battery", "comparison", "n1", "n2", "u_value", "u_min", "critical_value",
               "p_value", "p_method", "alpha", "result")


def _metric_cells(e: MetricsEntry) -> list:
    m = e.metrics
    return [e.database, e.model, e.version, e.counts.tp, e.counts.fp, e.counts.fn,
            _pct(m.recall_pct), _pct(m.precision_pct), _pct(m.f1_pct), _pct(m.map_pct),
            ";".join(m.degenerate)]


def _test_cells(battery: str, t: UTestOutcome) -> list:
    return [battery, f"{t.label_a} x {t.label_b}", t.n1, t.n2, format_u(t.u1), format_u(t.u),
            "" if t.critical_value is None else t.critical_value, f"{t.p_two_tailed:.4f}",
            t.p_method, f"{t.alpha:g}", t.decision.value]


def _all_tests(report: Report):
    yield from (("database", t) for t in report.database_tests)
    yield from (("version", t) for t in report.version_tests)


def _render_csv(report: Report) -> str:
    """Metrics table, a blank line, then the hypothesis-test table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_HEADER)
    writer.writerows(_metric_cells(e) for e in report.metrics)
    buf.write("\n")
    writer.writerow(TEST_HEADER)
    writer.writerows(_test_cells(b, t) for b, t in _all_tests(report))
    return buf.getvalue()


def _md_table(header: Sequence[str], rows) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def _render_markdown(report: Report) -> str:
    out = ["## Detection results", ""]
    out += _md_table(
        ("Training Database", "Model", "True Positive", "False Positive", "False Negative"),
        ((e.database, e.model, e.counts.tp, e.counts.fp, e.counts.fn) for e in report.metrics),
    )
    out += ["", "## Calculated metrics", ""]
    out += _md_table(
        ("Training Database", "Model", "Recall (%)", "Precision (%)", "F1-score (%)", "mAP (%)"),
        ((e.database, e.model, _pct(e.metrics.recall_pct), _pct(e.metrics.precision_pct),
          _pct(e.metrics.f1_pct), _pct(e.metrics.map_pct)) for e in report.metrics),
    )
    for title, tests in (("Mann-Whitney U test: training databases", report.database_tests),
                         ("Mann-Whitney U test: model versions", report.version_tests)):
        out += ["", f"## {title}", ""]
        out += _md_table(
            ("Comparison", "U Value", "min U", "Critical Value", "p-value", "Results"),
            ((f"{t.label_a} x {t.label_b}", format_u(t.u1), format_u(t.u),
              "" if t.critical_value is None else t.critical_value,
              f"{t.p_two_tailed:.4f}", t.decision.value) for t in tests),
        )
        if tests:
            t = tests[0]
            out += ["", f"alpha={t.alpha:g}, two-tailed"]
    return "\n".join(out) + "\n"


def render(report: Report, fmt: str = "markdown") -> str:
    """Deterministic text rendering of a report."""
    if fmt == "json":
        return _render_json(report)
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "markdown":
        return _render_markdown(report)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def metric_series(report: Report) -> dict[str, list[tuple[str, float | None]]]:
    """(label, value) series per metric, ready for bar charts."""
    labels = [f"{e.database}/{e.model}" for e in report.metrics]
    series = {}
    for name in ("recall_pct", "precision_pct", "f1_pct", "map_pct"):
        series[name] = [(label, getattr(e.metrics, name)) for label, e in zip(labels, report.metrics)]
    return series


def write_output(text: str, path: str | os.PathLike) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise AxleEvalError(f"cannot write {path}: {exc}") from None
