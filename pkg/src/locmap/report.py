"""Report emission: JSON for machines, CSV rows per threshold, and
hand-rolled SVG line plots (no plotting dependency).

The config echo deliberately excludes execution-only knobs such as the
worker count, so reports are byte-identical for any --jobs value.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .direct_eval import EvalCurve
from .edge_eval import EdgeBenchResult

_EXECUTION_KEYS = ("jobs",)


def _echo(config: dict) -> dict:
    return {k: v for k, v in config.items() if k not in _EXECUTION_KEYS}


def map_report(config: dict, curve: EvalCurve, summary_extra: dict | None = None) -> dict:
    summary = {
        "peak_iou": float(curve.peak_iou),
        "peak_t": int(curve.peak_t),
        "ap": float(curve.ap),
    }
    if summary_extra:
        summary.update(summary_extra)
    return {
        "config": _echo(config),
        "curve": {
            "thresholds": [int(t) for t in curve.thresholds],
            "mean_iou": [float(v) for v in curve.mean_iou],
            "precision": [float(v) for v in curve.precision],
            "recall": [float(v) for v in curve.recall],
        },
        "summary": summary,
    }


def edge_report(config: dict, result: EdgeBenchResult) -> dict:
    return {
        "config": _echo(config),
        "curve": {
            "thresholds": [float(t) for t in result.thresholds],
            "precision": [float(v) for v in result.precision],
            "recall": [float(v) for v in result.recall],
            "f": [float(v) for v in result.f],
        },
        "summary": {"ods": float(result.ods), "ois": float(result.ois), "ap": float(result.ap)},
    }


def box_report(config: dict, accuracies: dict, sweep_rows: list[dict] | None = None) -> dict:
    doc = {"config": _echo(config), "summary": {k: float(v) for k, v in accuracies.items()}}
    if sweep_rows is not None:
        doc["sweep"] = sweep_rows
    return doc


def write_json(doc: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def write_curve_csv(doc: dict, path) -> Path:
    """One row per threshold, columns taken from the report's curve object."""
    curve = doc["curve"]
    keys = list(curve.keys())
    lines = [",".join(keys)]
    for i in range(len(curve["thresholds"])):
        lines.append(",".join(repr(curve[k][i]) for k in keys))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sweep_csv(rows: list[dict], path) -> Path:
    lines = ["k,gtknown_acc,peak_iou"]
    for row in rows:
        lines.append(f"{row['k']},{row['gtknown_acc']!r},{row['peak_iou']!r}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_plot_svg(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    path,
    title: str,
    x_label: str,
    y_label: str,
    x_range: tuple[float, float] | None = None,
    y_range: tuple[float, float] = (0.0, 1.0),
) -> Path:
    """Minimal deterministic SVG line plot of (label, xs, ys) series."""
    if x_range is None:
        x_lo = min(float(np.min(xs)) for _, xs, _ in series)
        x_hi = max(float(np.max(xs)) for _, xs, _ in series)
    else:
        x_lo, x_hi = x_range
    y_lo, y_hi = y_range
    span_x = (x_hi - x_lo) or 1.0
    span_y = (y_hi - y_lo) or 1.0
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x):
        return _ML + (x - x_lo) / span_x * plot_w

    def py(y):
        return _MT + (1.0 - (y - y_lo) / span_y) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    for i in range(5):
        frac = i / 4.0
        gx = px(x_lo + frac * span_x)
        gy = py(y_lo + frac * span_y)
        parts.append(
            f'<line x1="{_fmt(gx)}" y1="{py(y_lo):.1f}" x2="{_fmt(gx)}" y2="{py(y_hi):.1f}" '
            'stroke="#dddddd"/>'
        )
        parts.append(
            f'<line x1="{px(x_lo):.1f}" y1="{_fmt(gy)}" x2="{px(x_hi):.1f}" y2="{_fmt(gy)}" '
            'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{_fmt(gx)}" y="{_H - _MB + 18}" text-anchor="middle">'
            f"{x_lo + frac * span_x:g}</text>"
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{_fmt(gy + 4)}" text-anchor="end">'
            f"{y_lo + frac * span_y:g}</text>"
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>'
    )
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{_fmt(px(float(x)))},{_fmt(py(float(y)))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * idx
        parts.append(
            f'<line x1="{_ML + 10}" y1="{ly - 4}" x2="{_ML + 34}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{_ML + 40}" y="{ly}">{label}</text>')
    parts.append(
        f'<text x="{_ML + plot_w / 2:.0f}" y="{_H - 12}" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + plot_h / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MT + plot_h / 2:.0f})">{y_label}</text>'
    )
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path


def write_map_plots(doc: dict, base: Path) -> list[Path]:
    curve = doc["curve"]
    thresholds = np.asarray(curve["thresholds"], dtype=np.float64)
    out = [
        line_plot_svg(
            [("mean IoU", thresholds, np.asarray(curve["mean_iou"]))],
            base.with_suffix(".svg"),
            title="IoU-Threshold curve",
            x_label="threshold",
            y_label="IoU",
            x_range=(0, 255),
        )
    ]
    out.append(
        line_plot_svg(
            [("PR", np.asarray(curve["recall"]), np.asarray(curve["precision"]))],
            base.with_name(base.stem + "_pr.svg"),
            title="Precision-Recall curve",
            x_label="recall",
            y_label="precision",
            x_range=(0, 1),
        )
    )
    return out


def write_edge_plots(doc: dict, base: Path) -> list[Path]:
    curve = doc["curve"]
    return [
        line_plot_svg(
            [("PR", np.asarray(curve["recall"]), np.asarray(curve["precision"]))],
            base.with_name(base.stem + "_pr.svg"),
            title="Edge Precision-Recall",
            x_label="recall",
            y_label="precision",
            x_range=(0, 1),
        )
    ]
