/** Small perceptual colormap (viridis anchor points, linear interpolation). */

import type { Color } from "./raster.js";

const ANCHORS: Color[] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0, 1] to an RGB color; values outside are clamped. */
export function colormap(t: number): Color {
  if (!Number.isFinite(t)) t = 0;
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (ANCHORS.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.min(lo + 1, ANCHORS.length - 1);
  const frac = pos - lo;
  return [
    Math.round(ANCHORS[lo][0] + frac * (ANCHORS[hi][0] - ANCHORS[lo][0])),
    Math.round(ANCHORS[lo][1] + frac * (ANCHORS[hi][1] - ANCHORS[lo][1])),
    Math.round(ANCHORS[lo][2] + frac * (ANCHORS[hi][2] - ANCHORS[lo][2])),
  ];
}
