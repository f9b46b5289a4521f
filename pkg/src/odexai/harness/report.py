"""Report emission: Table-style CSV/JSON and the spider (radar) plot SVG."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from ..metrics import EvaluationRecord, TABLE_COLUMNS
from .benchmark import BenchmarkReport, GroupAggregate, GroupKey

THREE_AXES = ("OA", "EBPG", "Sparsity")
ALL_AXES = ("OA", "Ins", "1-Del", "PG", "EBPG", "Sparsity")

# Raw metric feeding each axis, and whether larger raw values are better.
_AXIS_SOURCE: dict[str, tuple[str, bool]] = {
    "OA": ("oa", True),
    "Ins": ("ins_auc", True),
    "1-Del": ("del_auc", False),
    "PG": ("pg", True),
    "EBPG": ("ebpg", True),
    "Sparsity": ("sparsity", True),
}

_PALETTE = ("#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2")


@dataclass(frozen=True)
class AxisValue:
    name: str
    value: float | None  # normalized to [0, 1]; None when the raw value is missing
    raw: float | None
    higher_better: bool


def _method_raws(report: BenchmarkReport) -> dict[str, dict[str, float | None]]:
    """Pool each method's aggregates across its (model, dataset) groups."""
    per_method: dict[str, list[GroupAggregate]] = {}
    for (method, _model, _dataset), agg in sorted(report.aggregates.items()):
        per_method.setdefault(method, []).append(agg)
    pooled: dict[str, dict[str, float | None]] = {}
    for method, aggs in per_method.items():
        raws: dict[str, float | None] = {}
        for metric in ("ins_auc", "del_auc", "oa", "pg", "sparsity", "time_s"):
            raws[metric] = sum(getattr(a, metric) for a in aggs) / len(aggs)
        present = [a.ebpg for a in aggs if a.ebpg is not None]
        raws["ebpg"] = sum(present) / len(present) if present else None
        pooled[method] = raws
    return pooled


def spider_axes(report: BenchmarkReport, mode: str = "three_axis") -> dict[str, list[AxisValue]]:
    """Direction-aware per-axis normalization across the report's methods.

    v' = (v - worst) / (best - worst), with lower-better metrics inverted;
    when every method agrees on a metric (including the single-method case)
    the axis is 1.0 for all.
    """
    if mode == "three_axis":
        axis_names = THREE_AXES
    elif mode == "all_metrics":
        axis_names = ALL_AXES
    else:
        raise ValueError(f"unknown spider mode {mode!r}")
    raws = _method_raws(report)
    out: dict[str, list[AxisValue]] = {m: [] for m in sorted(raws)}
    for axis in axis_names:
        metric, higher_better = _AXIS_SOURCE[axis]
        values = {m: raws[m][metric] for m in out}
        present = [v for v in values.values() if v is not None]
        lo = min(present) if present else None
        hi = max(present) if present else None
        for method in out:
            raw = values[method]
            if raw is None:
                out[method].append(AxisValue(axis, None, None, higher_better))
                continue
            if lo == hi:
                norm = 1.0
            elif higher_better:
                norm = (raw - lo) / (hi - lo)  # type: ignore[operator]
            else:
                norm = (hi - raw) / (hi - lo)  # type: ignore[operator]
            out[method].append(AxisValue(axis, norm, raw, higher_better))
    return out


def emit_spider_svg(report: BenchmarkReport, mode: str = "three_axis") -> bytes:
    """Deterministic radar chart; vertices carry the raw values as hover titles."""
    axes = spider_axes(report, mode)
    methods = sorted(axes)
    axis_names = [a.name for a in axes[methods[0]]] if methods else []
    n = len(axis_names)
    cx, cy, radius = 230.0, 230.0, 160.0

    def point(i: int, value: float) -> tuple[float, float]:
        angle = -math.pi / 2.0 + 2.0 * math.pi * i / n
        return cx + radius * value * math.cos(angle), cy + radius * value * math.sin(angle)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" width="560" height="460" '
        'font-family="sans-serif" font-size="12">',
        '<rect width="560" height="460" fill="white"/>',
    ]
    for ring in (0.25, 0.5, 0.75, 1.0):
        ring_points = " ".join(
            f"{x:.4f},{y:.4f}" for x, y in (point(i, ring) for i in range(n))
        )
        parts.append(
            f'<polygon points="{ring_points}" fill="none" stroke="#dddddd" stroke-width="1"/>'
        )
    for i, name in enumerate(axis_names):
        x, y = point(i, 1.0)
        lx, ly = point(i, 1.14)
        missing_everywhere = all(a.raw is None for m in methods for a in axes[m] if a.name == name)
        dash = ' stroke-dasharray="4 3"' if missing_everywhere else ""
        parts.append(
            f'<line x1="{cx:.4f}" y1="{cy:.4f}" x2="{x:.4f}" y2="{y:.4f}" '
            f'stroke="#bbbbbb" stroke-width="1"{dash}/>'
        )
        anchor = "middle" if abs(lx - cx) < 1.0 else ("start" if lx > cx else "end")
        parts.append(f'<text x="{lx:.4f}" y="{ly:.4f}" text-anchor="{anchor}">{name}</text>')
    for mi, method in enumerate(methods):
        color = _PALETTE[mi % len(_PALETTE)]
        values = axes[method]
        coords = [point(i, a.value if a.value is not None else 0.0) for i, a in enumerate(values)]
        polygon = " ".join(f"{x:.4f},{y:.4f}" for x, y in coords)
        parts.append(
            f'<polygon points="{polygon}" fill="{color}" fill-opacity="0.25" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        for (x, y), axis in zip(coords, values):
            direction = "higher better" if axis.higher_better else "lower better"
            raw = "missing" if axis.raw is None else f"{axis.raw:.6f}"
            parts.append(
                f'<circle cx="{x:.4f}" cy="{y:.4f}" r="3.5" fill="{color}">'
                f"<title>{method} {axis.name}: raw {raw} ({direction})</title></circle>"
            )
        parts.append(
            f'<rect x="440" y="{30 + 22 * mi}" width="14" height="14" fill="{color}"/>'
            f'<text x="460" y="{42 + 22 * mi}">{method}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")


# ---------------------------------------------------------------------------
# table emission


def _column_key(key: GroupKey) -> str:
    method, model, dataset = key
    return f"{dataset}/{model}/{method}"


def emit_table(report: BenchmarkReport) -> tuple[str, str]:
    """(CSV text, JSON text): metric rows by method x model x dataset columns.

    Float cells use repr so re-parsing reproduces the aggregates exactly;
    missing values render as an em-dash placeholder.
    """
    keys = sorted(report.aggregates)
    rows: dict[str, list[str]] = {name: [] for name in TABLE_COLUMNS}
    for key in keys:
        agg = report.aggregates[key]
        rows["Ins"].append(repr(agg.ins_auc))
        rows["Del"].append(repr(agg.del_auc))
        rows["OA"].append(repr(agg.oa))
        rows["PG"].append(repr(agg.pg))
        rows["EBPG"].append("—" if agg.ebpg is None else repr(agg.ebpg))
        rows["Sparsity"].append(repr(agg.sparsity))
        rows["Time(s)"].append(repr(agg.time_s))

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["Metric", *(_column_key(k) for k in keys)])
    for name in TABLE_COLUMNS:
        writer.writerow([name, *rows[name]])
    return buf.getvalue(), report_to_json(report)


def parse_table_csv(text: str) -> dict[GroupKey, dict[str, float | None]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    keys: list[GroupKey] = []
    for column in header[1:]:
        dataset, model, method = column.split("/")
        keys.append((method, model, dataset))
    out: dict[GroupKey, dict[str, float | None]] = {k: {} for k in keys}
    for row in reader:
        metric = row[0]
        for key, cell in zip(keys, row[1:]):
            out[key][metric] = None if cell == "—" else float(cell)
    return out


# ---------------------------------------------------------------------------
# JSON round trip and the bundle directory


def report_to_json(report: BenchmarkReport) -> str:
    payload = {
        "config": dict(report.config),
        "records": [r.to_dict() for r in report.records],
        "aggregates": [
            {"method": m, "model": mo, "dataset": ds, **agg.to_dict()}
            for (m, mo, ds), agg in sorted(report.aggregates.items())
        ],
        "skips": list(report.skips),
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def report_from_json(text: str) -> BenchmarkReport:
    payload = json.loads(text)
    aggregates: dict[GroupKey, GroupAggregate] = {}
    for entry in payload["aggregates"]:
        entry = dict(entry)
        key = (entry.pop("method"), entry.pop("model"), entry.pop("dataset"))
        aggregates[key] = GroupAggregate.from_dict(entry)
    return BenchmarkReport(
        config=payload["config"],
        records=tuple(EvaluationRecord.from_dict(r) for r in payload["records"]),
        aggregates=aggregates,
        skips=tuple(payload["skips"]),
    )


def write_report_bundle(report: BenchmarkReport, out_dir) -> dict[str, Path]:
    """Write report.json, report.csv, both spider SVGs, skips.log, config.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_text, json_text = emit_table(report)
    paths = {
        "report.json": out_dir / "report.json",
        "report.csv": out_dir / "report.csv",
        "spider_3axis.svg": out_dir / "spider_3axis.svg",
        "spider_all.svg": out_dir / "spider_all.svg",
        "skips.log": out_dir / "skips.log",
        "config.json": out_dir / "config.json",
    }
    paths["report.json"].write_text(json_text + "\n")
    paths["report.csv"].write_text(csv_text)
    paths["spider_3axis.svg"].write_bytes(emit_spider_svg(report, "three_axis"))
    paths["spider_all.svg"].write_bytes(emit_spider_svg(report, "all_metrics"))
    paths["skips.log"].write_text("".join(json.dumps(s, sort_keys=True) + "\n" for s in report.skips))
    paths["config.json"].write_text(json.dumps(dict(report.config), indent=2, sort_keys=True) + "\n")
    return paths
