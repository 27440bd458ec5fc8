"""Report documents and their renderings.

Evaluation reports serialize to a JSON document whose metric values are fixed
4-decimal strings (the reporting style of the accompanying result tables, and
the only way a JSON document can carry a value like "0.5000" verbatim). The
same document renders to a markdown table, a flat CSV (one row per class per
stratum), or a PR-curve SVG with one polyline per class.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Mapping

from . import __version__
from .annotate_io import _as_document
from .errors import MalformedRecordError
from .metrics import EvalReport, StratifiedReport

__all__ = [
    "REPORT_SCHEMA",
    "STRATIFIED_SCHEMA",
    "report_to_json",
    "stratified_to_json",
    "load_report_document",
    "render_markdown",
    "render_csv",
    "render_svg",
]

REPORT_SCHEMA = "shipbench/eval-report/v1"
STRATIFIED_SCHEMA = "shipbench/eval-report-stratified/v1"

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _f4(x: float) -> str:
    return f"{x:.4f}"


def _config_block(report: EvalReport) -> dict:
    cfg = report.config
    return {
        "iou_threshold": _f4(cfg.iou_threshold),
        "ap_mode": cfg.ap_mode,
        "operating_point_rule": cfg.operating_point_rule,
        "class_filter": sorted(cfg.class_filter) if cfg.class_filter is not None else None,
    }


def _curve_rows(curve) -> list[list[str]]:
    return [[_f4(p.confidence), _f4(p.precision), _f4(p.recall)] for p in curve.points]


def _op_block(op) -> dict:
    return {
        "precision": _f4(op.precision),
        "recall": _f4(op.recall),
        "confidence": _f4(op.confidence),
    }


def _report_body(report: EvalReport) -> dict:
    return {
        "counts": {
            "images": report.num_images,
            "ground_truths": report.num_gt,
            "detections": report.num_det,
        },
        "map": _f4(report.map_value),
        "empty": report.empty,
        "pooled": {**_op_block(report.pooled_op), "curve": _curve_rows(report.pooled_curve)},
        "classes": [
            {
                "class_id": ce.class_id,
                "name": ce.name,
                "ground_truths": ce.num_gt,
                "detections": ce.num_det,
                "ap": _f4(ce.ap) if ce.ap is not None else None,
                "operating_point": _op_block(ce.op),
                "curve": _curve_rows(ce.curve),
            }
            for ce in report.classes
        ],
    }


def report_to_json(report: EvalReport) -> str:
    doc = {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "config": _config_block(report),
        **_report_body(report),
    }
    return json.dumps(doc, indent=2) + "\n"


def stratified_to_json(report: StratifiedReport) -> str:
    first = report.strata[0][1]
    doc = {
        "schema": STRATIFIED_SCHEMA,
        "tool_version": __version__,
        "config": _config_block(first),
        "strata": {name: _report_body(rep) for name, rep in report.strata},
    }
    return json.dumps(doc, indent=2) + "\n"


def load_report_document(document: str | bytes | Mapping) -> dict:
    """Load either report flavour into {stratum name -> body} plus header info."""
    doc = _as_document(document)
    schema = doc.get("schema")
    if schema == REPORT_SCHEMA:
        strata = {"all": {k: doc[k] for k in ("counts", "map", "empty", "pooled", "classes")}}
    elif schema == STRATIFIED_SCHEMA:
        strata = dict(doc["strata"])
    else:
        raise MalformedRecordError(f"not an evaluation report document: schema {schema!r}")
    return {
        "schema": schema,
        "tool_version": doc.get("tool_version", ""),
        "config": doc.get("config", {}),
        "strata": strata,
    }


def _stratum_order(strata: Mapping[str, dict]) -> list[str]:
    names = [n for n in strata if n != "all"]
    return (["all"] if "all" in strata else []) + sorted(names)


def render_markdown(document: str | bytes | Mapping) -> str:
    """Markdown tables: one summary row per stratum, then per-class rows."""
    doc = load_report_document(document)
    cfg = doc["config"]
    lines = [
        "# Detection evaluation report",
        "",
        f"- tool version: {doc['tool_version']}",
        f"- IoU threshold: {cfg.get('iou_threshold', '')}",
        f"- AP mode: {cfg.get('ap_mode', '')}",
        f"- operating point rule: {cfg.get('operating_point_rule', '')}",
        "",
        "| Stratum | Images | GT | Detections | mAP | Precision | Recall | Confidence |",
        "| --- | ---: | ---: | ---: | ---: | ---: | ---: | ---: |",
    ]
    strata = doc["strata"]
    for name in _stratum_order(strata):
        body = strata[name]
        counts = body["counts"]
        pooled = body["pooled"]
        empty = " (no ground truth)" if body.get("empty") else ""
        lines.append(
            f"| {name}{empty} | {counts['images']} | {counts['ground_truths']} "
            f"| {counts['detections']} | {body['map']} | {pooled['precision']} "
            f"| {pooled['recall']} | {pooled['confidence']} |"
        )
    lines += [
        "",
        "| Stratum | Class | AP | Precision | Recall | Confidence | GT | Detections |",
        "| --- | --- | ---: | ---: | ---: | ---: | ---: | ---: |",
    ]
    for name in _stratum_order(strata):
        for ce in strata[name]["classes"]:
            op = ce["operating_point"]
            ap = ce["ap"] if ce["ap"] is not None else "n/a"
            lines.append(
                f"| {name} | {ce['name']} | {ap} | {op['precision']} | {op['recall']} "
                f"| {op['confidence']} | {ce['ground_truths']} | {ce['detections']} |"
            )
    return "\n".join(lines) + "\n"


def render_csv(document: str | bytes | Mapping) -> str:
    """Flat CSV: header plus exactly one row per class per stratum."""
    doc = load_report_document(document)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "stratum",
            "class_id",
            "class_name",
            "ground_truths",
            "detections",
            "ap",
            "precision",
            "recall",
            "confidence",
        ]
    )
    strata = doc["strata"]
    for name in _stratum_order(strata):
        for ce in strata[name]["classes"]:
            op = ce["operating_point"]
            writer.writerow(
                [
                    name,
                    ce["class_id"],
                    ce["name"],
                    ce["ground_truths"],
                    ce["detections"],
                    ce["ap"] if ce["ap"] is not None else "",
                    op["precision"],
                    op["recall"],
                    op["confidence"],
                ]
            )
    return out.getvalue()


def render_svg(document: str | bytes | Mapping, stratum: str = "all") -> str:
    """PR-curve SVG for one stratum: unit axes, one polyline per class.

    Classes with empty curves contribute no polyline, so a report with no
    ground truth renders as bare axes.
    """
    doc = load_report_document(document)
    if stratum not in doc["strata"]:
        raise MalformedRecordError(f"report has no stratum {stratum!r}")
    body = doc["strata"][stratum]

    size, margin = 480, 60
    span = size - 2 * margin

    def px(recall: float) -> float:
        return margin + recall * span

    def py(precision: float) -> float:
        return size - margin - precision * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    # gridlines with tick labels every 0.25, frame, axis titles
    for i in range(5):
        t = i / 4.0
        parts.append(
            f'<line x1="{px(t):.1f}" y1="{py(0.0):.1f}" x2="{px(t):.1f}" y2="{py(1.0):.1f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{px(0.0):.1f}" y1="{py(t):.1f}" x2="{px(1.0):.1f}" y2="{py(t):.1f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px(t):.1f}" y="{py(0.0) + 20:.1f}" font-size="12" '
            f'text-anchor="middle">{t:.2f}</text>'
        )
        parts.append(
            f'<text x="{px(0.0) - 8:.1f}" y="{py(t) + 4:.1f}" font-size="12" '
            f'text-anchor="end">{t:.2f}</text>'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{size / 2:.1f}" y="{size - 15}" font-size="14" '
        'text-anchor="middle">recall</text>'
    )
    parts.append(
        f'<text x="18" y="{size / 2:.1f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 18 {size / 2:.1f})">precision</text>'
    )
    legend_y = margin + 16
    for idx, ce in enumerate(body["classes"]):
        if not ce["curve"]:
            continue
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(
            f"{px(float(r)):.2f},{py(float(p)):.2f}" for _conf, p, r in ce["curve"]
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{margin + 10}" y="{legend_y}" font-size="12" '
            f'fill="{color}">{ce["name"]}</text>'
        )
        legend_y += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
