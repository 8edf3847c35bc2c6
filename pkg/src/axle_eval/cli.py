"""Command-line front end.

Subcommands follow the experiment pipeline (training happens elsewhere)::

    axle-eval stats    MANIFEST
    axle-eval compose  MANIFEST_A MANIFEST_B --quota-a 175 --quota-b 175 --target 1176 --out DIR
    axle-eval eval     MANIFEST [--iou-thresh 0.5] [--conf-thresh 0.25] [--ap-interp all-point]
    axle-eval compare  MATRIX.csv [--alpha 0.05]
    axle-eval report   MATRIX.csv [--format markdown] [--out FILE]

Exit status: 0 success, 1 internal error, 2 user/input error. Set
AXLE_EVAL_LOG (DEBUG, INFO, WARNING, ...) to control log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import report as report_mod
from .annotations import dataset_stats, load_dataset, save_dataset
from .composer import CompositionSpec, compose_mixed
from .errors import AxleEvalError
from .matching import DEFAULT_CONFIDENCE_THRESHOLD, DEFAULT_IOU_THRESHOLD
from .metrics import INTERPOLATIONS, evaluate_dataset
from .report import build_report, format_u, load_matrix, metric_series, render, write_output

log = logging.getLogger("axle_eval")


def _unit_interval(lo_open: bool):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        ok = (0 < value <= 1) if lo_open else (0 <= value <= 1)
        if not ok:
            raise argparse.ArgumentTypeError(f"{value} outside {'(0, 1]' if lo_open else '[0, 1]'}")
        return value
    return parse


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("alpha must be in (0, 1)")
    return value


def _names(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        write_output(text, out)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _plural(label: str) -> str:
    return label if label.endswith("s") else label + "s"


def cmd_stats(args) -> int:
    dataset = load_dataset(args.manifest)
    stats = dataset_stats(dataset)
    if args.format == "json":
        doc = {
            "name": dataset.name,
            "images": stats.image_count,
            "objects": {dataset.categories[c]: stats.object_count_per_category.get(c, 0) for c in dataset.categories},
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        parts = [f"images: {stats.image_count}"]
        parts += [f"{_plural(label)}: {stats.object_count_per_category.get(c, 0)}"
                  for c, label in dataset.categories.items()]
        _emit(", ".join(parts) + "\n", args.out)
    return 0


def cmd_compose(args) -> int:
    a = load_dataset(args.manifest_a)
    b = load_dataset(args.manifest_b)
    quotas = {
        a.name: len(a) if args.quota_a is None else args.quota_a,
        b.name: len(b) if args.quota_b is None else args.quota_b,
    }
    spec = CompositionSpec(quotas, args.target, args.tolerance, args.category)
    result = compose_mixed(a, b, spec, seed=args.seed)
    dataset = result.dataset
    if args.name:
        dataset = type(dataset)(args.name, dataset.categories, dataset.images)
    manifest = save_dataset(dataset, args.out)

    per_source = ", ".join(f"{name}: {quotas[name]} images / {count} objects"
                           for name, count in result.per_source.items())
    line = f"images: {len(dataset)} ({per_source}), objects: {result.object_count}"
    if result.target_object_count is not None:
        line += f" (target {result.target_object_count} +/- {spec.tolerance}"
        line += ", within tolerance)" if result.within_tolerance else ", NOT within tolerance)"
    print(line)
    print(f"manifest: {manifest}")
    return 0


def cmd_eval(args) -> int:
    dataset = load_dataset(args.manifest, allow_missing_detections=True)
    if dataset.missing_detections:
        print(f"warning: {len(dataset.missing_detections)} image(s) have no detection file and count as "
              f"zero detections: {', '.join(dataset.missing_detections)}", file=sys.stderr)
    result = evaluate_dataset(dataset, args.iou_thresh, args.conf_thresh, args.ap_interp)
    row = result.row
    doc = {
        "dataset": dataset.name,
        "tp": result.counts.tp,
        "fp": result.counts.fp,
        "fn": result.counts.fn,
        "recall_pct": row.recall_pct,
        "precision_pct": row.precision_pct,
        "f1_pct": row.f1_pct,
        "map_pct": row.map_pct,
        "ap": {dataset.categories[c]: ap for c, ap in result.per_category_ap.items()},
        "degenerate": list(row.degenerate),
        "missing_detections": list(dataset.missing_detections),
        "iou_threshold": args.iou_thresh,
        "confidence_threshold": args.conf_thresh,
        "ap_interpolation": args.ap_interp,
    }
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    elif args.format == "csv":
        keys = ("dataset", "tp", "fp", "fn", "recall_pct", "precision_pct", "f1_pct", "map_pct")
        cells = []
        for k in keys:
            value = doc[k]
            if value is None:
                cells.append("")
            elif k.endswith("_pct"):
                cells.append(f"{value:.2f}")
            else:
                cells.append(str(value))
        text = ",".join(keys) + "\n" + ",".join(cells) + "\n"
    else:
        map_text = "n/a" if row.map_pct is None else f"{row.map_pct:.2f}"
        text = (
            f"tp: {result.counts.tp}, fp: {result.counts.fp}, fn: {result.counts.fn}\n"
            f"recall: {row.recall_pct:.2f}%, precision: {row.precision_pct:.2f}%, "
            f"f1: {row.f1_pct:.2f}%, mAP: {map_text}%\n"
        )
        for c, ap in result.per_category_ap.items():
            text += f"AP[{dataset.categories[c]}]: {ap:.4f}\n"
        if row.degenerate:
            text += f"degenerate: {', '.join(row.degenerate)} (zero denominator, reported as 0)\n"
    _emit(text, args.out)
    return 0


def _build(args):
    matrix = load_matrix(args.matrix)
    return build_report(matrix, args.alpha, args.database_order, args.version_order), matrix


def cmd_compare(args) -> int:
    matrix = load_matrix(args.matrix)
    if not matrix.has_map:
        raise AxleEvalError("mAP column required: every matrix row needs a map_pct value for the U tests")
    rep = build_report(matrix, args.alpha, args.database_order, args.version_order)
    for battery, tests in (("database", rep.database_tests), ("version", rep.version_tests)):
        for t in tests:
            crit = "none" if t.critical_value is None else str(t.critical_value)
            print(f"[{battery}] {t.label_a} x {t.label_b}: U={format_u(t.u1)} (min {format_u(t.u)}), "
                  f"critical={crit}, p={t.p_two_tailed:.4f} ({t.p_method}), {t.decision.value}")
    if args.out:
        write_output(render(rep, args.format), args.out)
    return 0


def cmd_report(args) -> int:
    rep, matrix = _build(args)
    if not matrix.has_map:
        log.warning("mAP missing for some rows; hypothesis tests skipped")
    _emit(render(rep, args.format), args.out)
    if args.series:
        write_output(json.dumps(metric_series(rep), indent=2) + "\n", args.series)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axle-eval",
        description="Evaluate object detections and compare experiment results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="count images and objects in a dataset manifest")
    p.add_argument("manifest", help="dataset manifest (JSON)")
    p.add_argument("--format", choices=("text", "json"), default="text", help="output format (default: text)")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compose", help="compose a mixed dataset from two sources")
    p.add_argument("manifest_a", help="first source manifest")
    p.add_argument("manifest_b", help="second source manifest")
    p.add_argument("--quota-a", type=int, help="images taken from the first source (default: all)")
    p.add_argument("--quota-b", type=int, help="images taken from the second source (default: all)")
    p.add_argument("--target", type=int, help="object count to steer the selection toward")
    p.add_argument("--tolerance", type=int, help="allowed |achieved - target| in objects (default: 1%% of target)")
    p.add_argument("--category", type=int, help="count only this category id (default: all objects)")
    p.add_argument("--name", help="name recorded in the composed manifest")
    p.add_argument("--seed", type=int, default=0, help="selection seed (default: 0)")
    p.add_argument("--out", required=True, help="directory for the composed manifest and labels")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("eval", help="match detections to ground truth and compute metrics")
    p.add_argument("manifest", help="dataset manifest with 'det' entries")
    p.add_argument("--iou-thresh", type=_unit_interval(True), default=DEFAULT_IOU_THRESHOLD,
                   help=f"minimum IoU for a true positive (default: {DEFAULT_IOU_THRESHOLD})")
    p.add_argument("--conf-thresh", type=_unit_interval(False), default=DEFAULT_CONFIDENCE_THRESHOLD,
                   help=f"minimum confidence counted as a detection (default: {DEFAULT_CONFIDENCE_THRESHOLD})")
    p.add_argument("--ap-interp", choices=INTERPOLATIONS, default="all-point",
                   help="AP interpolation (default: all-point)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text", help="output format")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.set_defaults(func=cmd_eval)

    for name, func, help_text in (
        ("compare", cmd_compare, "run Mann-Whitney U tests over databases and model versions"),
        ("report", cmd_report, "render metric tables and hypothesis tests"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("matrix", help="experiment matrix CSV (model,version,database,tp,fp,fn,map_pct)")
        p.add_argument("--alpha", type=_alpha, default=0.05, help="significance level (default: 0.05)")
        p.add_argument("--format", choices=report_mod.FORMATS, default="markdown",
                       help="format of the written report (default: markdown)")
        p.add_argument("--out", help="write the report to this file" + ("" if name == "compare" else " instead of stdout"))
        p.add_argument("--database-order", type=_names, help="comma-separated database order for comparisons")
        p.add_argument("--version-order", type=_names, help="comma-separated version order for comparisons")
        if name == "report":
            p.add_argument("--series", help="also write plot-ready metric series (JSON) to this file")
        p.set_defaults(func=func)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("AXLE_EVAL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AxleEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
