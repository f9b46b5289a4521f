import type { AxisValue, EvaluationRecord } from "./types.js";

export interface RadarVertex {
  x: number;
  y: number;
  /** Hover text: axis name, raw metric value, and score direction. */
  title: string;
  missing: boolean;
}

export interface RadarAxisLine {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  labelX: number;
  labelY: number;
  label: string;
  dashed: boolean;
}

export interface RadarModel {
  size: number;
  rings: string[];
  axes: RadarAxisLine[];
  polygonPoints: string;
  vertices: RadarVertex[];
}

function fmt(value: number): string {
  return value.toFixed(4);
}

/** Geometry for an n-axis radar chart; pure math, no DOM. */
export function buildRadar(axes: readonly AxisValue[], size = 320): RadarModel {
  const n = axes.length;
  const cx = size / 2;
  const cy = size / 2;
  const radius = size * 0.36;
  const point = (i: number, value: number): [number, number] => {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / n;
    return [cx + radius * value * Math.cos(angle), cy + radius * value * Math.sin(angle)];
  };

  const rings = [0.25, 0.5, 0.75, 1.0].map((ring) =>
    Array.from({ length: n }, (_, i) => point(i, ring).map(fmt).join(",")).join(" "),
  );
  const axisLines = axes.map((axis, i) => {
    const [x2, y2] = point(i, 1.0);
    const [labelX, labelY] = point(i, 1.18);
    return {
      x1: cx,
      y1: cy,
      x2,
      y2,
      labelX,
      labelY,
      label: axis.name,
      dashed: axis.raw === null,
    };
  });
  const vertices = axes.map((axis, i) => {
    const [x, y] = point(i, axis.value ?? 0);
    const direction = axis.higher_better ? "higher better" : "lower better";
    const raw = axis.raw === null ? "—" : fmt(axis.raw);
    return { x, y, title: `${axis.name}: raw ${raw} (${direction})`, missing: axis.raw === null };
  });
  return {
    size,
    rings,
    axes: axisLines,
    polygonPoints: vertices.map((v) => `${fmt(v.x)},${fmt(v.y)}`).join(" "),
    vertices,
  };
}

export type RadarMode = "three_axis" | "all_metrics";

/**
 * Axes for a single evaluation record. With one method every normalized
 * value is 1.0 by the degenerate rule; raw values carry the information.
 * Mode switching only changes which axes appear, never the raws.
 */
export function axesFromRecord(record: EvaluationRecord, mode: RadarMode): AxisValue[] {
  const all: AxisValue[] = [
    { name: "OA", value: 1.0, raw: record.oa, higher_better: true },
    { name: "Ins", value: 1.0, raw: record.ins_auc, higher_better: true },
    { name: "1-Del", value: 1.0, raw: record.del_auc, higher_better: false },
    { name: "PG", value: 1.0, raw: record.pg_hit ? 1.0 : 0.0, higher_better: true },
    {
      name: "EBPG",
      value: record.ebpg === null ? null : 1.0,
      raw: record.ebpg,
      higher_better: true,
    },
    { name: "Sparsity", value: 1.0, raw: record.sparsity, higher_better: true },
  ];
  if (mode === "all_metrics") return all;
  return all.filter((axis) => ["OA", "EBPG", "Sparsity"].includes(axis.name));
}

/** SVG markup for a radar model; deterministic for a fixed model. */
export function radarSvg(model: RadarModel, color = "#4c78a8"): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${model.size} ${model.size}" width="${model.size}" height="${model.size}">`,
  ];
  for (const ring of model.rings) {
    parts.push(`<polygon points="${ring}" fill="none" stroke="#ddd" stroke-width="1"/>`);
  }
  for (const axis of model.axes) {
    const dash = axis.dashed ? ' stroke-dasharray="4 3"' : "";
    parts.push(
      `<line x1="${fmt(axis.x1)}" y1="${fmt(axis.y1)}" x2="${fmt(axis.x2)}" y2="${fmt(axis.y2)}" stroke="#bbb"${dash}/>`,
      `<text x="${fmt(axis.labelX)}" y="${fmt(axis.labelY)}" text-anchor="middle" font-size="12">${axis.label}</text>`,
    );
  }
  parts.push(
    `<polygon points="${model.polygonPoints}" fill="${color}" fill-opacity="0.25" stroke="${color}" stroke-width="2"/>`,
  );
  for (const vertex of model.vertices) {
    parts.push(
      `<circle cx="${fmt(vertex.x)}" cy="${fmt(vertex.y)}" r="4" fill="${color}"><title>${vertex.title}</title></circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
