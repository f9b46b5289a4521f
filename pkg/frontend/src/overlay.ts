import { sampleColormap } from "./colormap.js";
import type { SaliencyGrid } from "./pgm.js";
import type { WireDetection } from "./types.js";

export interface BoxOverlay {
  index: number;
  x: number;
  y: number;
  width: number;
  height: number;
  label: string;
  selected: boolean;
}

/** Render model for the clickable detection boxes; exactly one is selected. */
export function boxOverlays(
  detections: readonly WireDetection[],
  selectedIndex: number | null,
): BoxOverlay[] {
  return detections.map((det) => ({
    index: det.index,
    x: det.bbox[0],
    y: det.bbox[1],
    width: det.bbox[2] - det.bbox[0],
    height: det.bbox[3] - det.bbox[1],
    label: `${det.class_name} ${(det.objectness * 100).toFixed(0)}%`,
    selected: det.index === selectedIndex,
  }));
}

/** Topmost box whose area contains the point, for canvas click hit-testing. */
export function hitTest(
  detections: readonly WireDetection[],
  x: number,
  y: number,
): number | null {
  for (let i = detections.length - 1; i >= 0; i -= 1) {
    const [x1, y1, x2, y2] = detections[i]!.bbox;
    if (x >= x1 && x < x2 && y >= y1 && y < y2) return detections[i]!.index;
  }
  return null;
}

export type OverlayMode = "heatmap" | "grayscale";

/**
 * RGBA pixels for the saliency layer composited above the image.
 * Heatmap mode maps values through the shared color ramp with uniform
 * opacity; grayscale mode shows the exact artifact values, fully opaque.
 * Opacity 0 yields a fully transparent layer (original image only).
 */
export function saliencyLayer(
  grid: SaliencyGrid,
  opacity: number,
  mode: OverlayMode = "heatmap",
): Uint8ClampedArray {
  const alpha = Math.round(Math.min(1, Math.max(0, opacity)) * 255);
  const out = new Uint8ClampedArray(grid.width * grid.height * 4);
  for (let i = 0; i < grid.values.length; i += 1) {
    const value = grid.values[i]!;
    let r: number, g: number, b: number;
    if (mode === "grayscale") {
      r = g = b = Math.round(value * 255);
    } else {
      [r, g, b] = sampleColormap(value);
    }
    out[i * 4] = r;
    out[i * 4 + 1] = g;
    out[i * 4 + 2] = b;
    out[i * 4 + 3] = mode === "grayscale" ? 255 : alpha;
  }
  return out;
}
