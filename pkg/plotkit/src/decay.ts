/** Semilog decay plot of trajectory envelopes, with an optional analytic
 * exponential overlay and a legend comparing the two rates. */

import type { TrajectoryData } from "./csv.js";
import { SchemaError, UsageError } from "./errors.js";
import { encodePng } from "./png.js";
import { BLACK, GREY, LIGHT_GREY, Raster, WHITE, textWidth, type Color } from "./raster.js";

export interface DecayResult {
  png: Uint8Array;
  width: number;
  height: number;
  /** slope of -ln|rho| over the drawn samples of the primary entry */
  fittedRate: number | null;
  analyticRate: number | null;
  legend: string[];
  warnings: string[];
}

const WIDTH = 1000;
const HEIGHT = 700;
const MARGIN = { left: 130, right: 50, top: 60, bottom: 90 };
const SERIES_COLORS: Color[] = [
  [31, 119, 180],
  [214, 39, 40],
  [44, 160, 44],
  [148, 103, 189],
];
// same underflow convention as the trajectory producer
const FLOOR = 1e-14;

function log10(x: number): number {
  return Math.log(x) / Math.LN10;
}

function fitRate(t: number[], values: number[]): number | null {
  const pts = t
    .map((ti, i) => [ti, values[i]] as const)
    .filter(([, v]) => v >= FLOOR);
  if (pts.length < 2) return null;
  const ys = pts.map(([, v]) => Math.log(v));
  const spread = Math.max(...ys) - Math.min(...ys);
  if (spread <= 1e-12) return 0; // flat to double precision
  const n = pts.length;
  const meanT = pts.reduce((s, [ti]) => s + ti, 0) / n;
  const meanY = ys.reduce((s, y) => s + y, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (pts[i][0] - meanT) * (ys[i] - meanY);
    den += (pts[i][0] - meanT) ** 2;
  }
  if (den === 0) return null;
  return -num / den;
}

export function renderDecay(traj: TrajectoryData, analyticRate: number | null): DecayResult {
  if (analyticRate !== null && !(analyticRate >= 0)) {
    throw new UsageError("analytic rate must be >= 0");
  }
  const labels = [...traj.abs.keys()].sort();
  if (labels.length === 0) {
    throw new SchemaError("trajectory has no abs_rho_i_j series");
  }
  const warnings: string[] = [];
  const t = traj.t;
  const tMin = Math.min(...t);
  const tMax = Math.max(...t);
  const tSpan = tMax - tMin || 1;

  // displayable samples are strictly positive; log range from all series
  let yLo = Number.POSITIVE_INFINITY;
  let yHi = Number.NEGATIVE_INFINITY;
  for (const label of labels) {
    for (const v of traj.abs.get(label)!) {
      if (v > 0) {
        yLo = Math.min(yLo, log10(v));
        yHi = Math.max(yHi, log10(v));
      }
    }
  }
  if (!Number.isFinite(yLo)) {
    throw new SchemaError("trajectory has no positive magnitudes to draw");
  }
  if (yHi - yLo < 0.1) {
    const mid = (yHi + yLo) / 2;
    yLo = mid - 0.05;
    yHi = mid + 0.05;
  }

  const raster = new Raster(WIDTH, HEIGHT);
  const plot = {
    x: MARGIN.left,
    y: MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
  const xOf = (ti: number) => plot.x + ((ti - tMin) / tSpan) * plot.w;
  const yOf = (logV: number) => plot.y + plot.h - ((logV - yLo) / (yHi - yLo)) * plot.h;

  // axes frame
  raster.line(plot.x, plot.y, plot.x + plot.w, plot.y, GREY);
  raster.line(plot.x + plot.w, plot.y, plot.x + plot.w, plot.y + plot.h, GREY);
  raster.line(plot.x, plot.y + plot.h, plot.x + plot.w, plot.y + plot.h, BLACK);
  raster.line(plot.x, plot.y, plot.x, plot.y + plot.h, BLACK);

  // y ticks at decades (or tenth-decades when the range is narrow)
  const decadeLo = Math.ceil(yLo - 1e-9);
  const decadeHi = Math.floor(yHi + 1e-9);
  const decades: number[] = [];
  for (let d = decadeLo; d <= decadeHi; d++) decades.push(d);
  const stride = Math.max(1, Math.ceil(decades.length / 8));
  for (const d of decades.filter((_, i) => i % stride === 0)) {
    const y = Math.round(yOf(d));
    raster.line(plot.x - 6, y, plot.x, y, BLACK);
    raster.line(plot.x, y, plot.x + plot.w, y, LIGHT_GREY);
    const label = `1e${d}`;
    raster.text(plot.x - 10 - textWidth(label), y - 7, label, BLACK);
  }
  // x ticks: 5 even divisions
  for (let k = 0; k <= 4; k++) {
    const ti = tMin + (tSpan * k) / 4;
    const x = Math.round(xOf(ti));
    raster.line(x, plot.y + plot.h, x, plot.y + plot.h + 6, BLACK);
    const label = ti.toExponential(1);
    raster.text(x - textWidth(label) / 2, plot.y + plot.h + 12, label, BLACK);
  }
  raster.text(plot.x + plot.w / 2 - textWidth("t (s)") / 2, HEIGHT - 32, "t (s)", BLACK);
  raster.textVertical(20, plot.y + plot.h / 2 + textWidth("|rho|") / 2, "|rho|", BLACK);

  // data series
  for (const [k, label] of labels.entries()) {
    const values = traj.abs.get(label)!;
    const color = SERIES_COLORS[k % SERIES_COLORS.length];
    let prev: readonly [number, number] | null = null;
    let dropped = 0;
    for (let i = 0; i < t.length; i++) {
      if (values[i] <= 0) {
        dropped += 1;
        prev = null;
        continue;
      }
      const pt = [xOf(t[i]), yOf(log10(values[i]))] as const;
      if (prev) raster.line(prev[0], prev[1], pt[0], pt[1], color, 2);
      prev = pt;
    }
    if (dropped > 0) {
      warnings.push(`rho_${label}: ${dropped} non-positive samples not drawn`);
    }
  }

  // analytic overlay anchored at the first sample of the primary entry
  const primary = traj.abs.get(labels[0])!;
  if (analyticRate !== null && primary[0] > 0) {
    let prev: readonly [number, number] | null = null;
    let phase = 0;
    for (let i = 0; i < t.length; i++) {
      const v = primary[0] * Math.exp(-analyticRate * (t[i] - t[0]));
      if (v <= 0 || log10(v) < yLo - 0.5) break;
      const pt = [xOf(t[i]), yOf(log10(v))] as const;
      if (prev) phase = raster.line(prev[0], prev[1], pt[0], pt[1], BLACK, 2, [7, 5], phase);
      prev = pt;
    }
  }

  const fitted = fitRate(t, primary);
  const legend: string[] = [];
  legend.push(`fitted ${fitted === null ? "n/a" : fitted.toExponential(3)} 1/s`);
  if (analyticRate !== null) {
    legend.push(`analytic ${analyticRate.toExponential(3)} 1/s`);
  }
  const legendW = Math.max(...legend.map((s) => textWidth(s))) + 40;
  const legendX = plot.x + plot.w - legendW - 10;
  let legendY = plot.y + 12;
  raster.fillRect(legendX - 8, legendY - 8, legendW + 16, legend.length * 22 + 12, WHITE);
  for (const [i, entry] of legend.entries()) {
    const swatchY = legendY + 6;
    if (i === 0) {
      raster.line(legendX, swatchY, legendX + 26, swatchY, SERIES_COLORS[0], 2);
    } else {
      raster.line(legendX, swatchY, legendX + 26, swatchY, BLACK, 2, [7, 5]);
    }
    raster.text(legendX + 34, legendY, entry, BLACK);
    legendY += 22;
  }

  return {
    png: encodePng(WIDTH, HEIGHT, raster.pixels),
    width: WIDTH,
    height: HEIGHT,
    fittedRate: fitted,
    analyticRate,
    legend,
    warnings,
  };
}
