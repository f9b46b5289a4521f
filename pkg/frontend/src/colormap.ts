// The saliency color ramp. Must stay identical to the toolkit's
// SALIENCY_COLORMAP_STOPS so overlays and report legends agree everywhere.
export const COLORMAP_STOPS: ReadonlyArray<readonly [number, readonly [number, number, number]]> = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

export function sampleColormap(value: number): [number, number, number] {
  const v = Math.min(1, Math.max(0, value));
  for (let i = 1; i < COLORMAP_STOPS.length; i += 1) {
    const [hiPos, hiColor] = COLORMAP_STOPS[i]!;
    if (v <= hiPos) {
      const [loPos, loColor] = COLORMAP_STOPS[i - 1]!;
      const t = hiPos === loPos ? 0 : (v - loPos) / (hiPos - loPos);
      return [
        Math.round(loColor[0] + t * (hiColor[0] - loColor[0])),
        Math.round(loColor[1] + t * (hiColor[1] - loColor[1])),
        Math.round(loColor[2] + t * (hiColor[2] - loColor[2])),
      ];
    }
  }
  const last = COLORMAP_STOPS[COLORMAP_STOPS.length - 1]![1];
  return [last[0], last[1], last[2]];
}
