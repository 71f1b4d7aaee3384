/** Collapse-rate heatmap over a log-log (lambda, r_c) grid, with iso-coherence
 * contours and white shading of excluded cells. */

import { colormap } from "./colormap.js";
import { marchingSquares, type Segment } from "./contour.js";
import type { ScanRow } from "./csv.js";
import { GridError, UsageError } from "./errors.js";
import { encodePng } from "./png.js";
import { BLACK, GREY, LIGHT_GREY, Raster, WHITE, textWidth } from "./raster.js";

export interface HeatmapSpec {
  /** which column provides the color field */
  value: "gamma" | "coherence";
  /** log color bounds; derived from the positive data range when omitted */
  colorMin?: number;
  colorMax?: number;
  /** paint cells the upstream scan marked excluded in white */
  shadeExclusions: boolean;
  /** iso-coherence levels in seconds, ascending */
  contourLevels: number[];
}

export const DEFAULT_HEATMAP_SPEC: HeatmapSpec = {
  value: "gamma",
  shadeExclusions: true,
  contourLevels: [1.0],
};

export interface ContourInfo {
  level: number;
  segments: number;
  dashed: boolean;
}

export interface HeatmapResult {
  png: Uint8Array;
  width: number;
  height: number;
  contours: ContourInfo[];
  excludedCells: number;
  warnings: string[];
}

const WIDTH = 1000;
const HEIGHT = 800;
const MARGIN = { left: 120, right: 170, top: 70, bottom: 100 };

interface Grid {
  lambdas: number[];
  rcs: number[];
  /** cell lookup by (ix, iy) */
  cell: (ix: number, iy: number) => ScanRow;
}

function buildGrid(rows: ScanRow[]): Grid {
  const lambdas = [...new Set(rows.map((r) => r.lambda))].sort((a, b) => a - b);
  const rcs = [...new Set(rows.map((r) => r.rc))].sort((a, b) => a - b);
  if (lambdas.length < 2 || rcs.length < 2) {
    throw new GridError(
      `cannot grid ${lambdas.length} lambda x ${rcs.length} r_c values; need at least 2 per axis`,
    );
  }
  const byKey = new Map<string, ScanRow>();
  for (const row of rows) {
    const key = `${row.lambda}|${row.rc}`;
    if (byKey.has(key)) {
      throw new GridError(
        "duplicate (lambda, r_c) cells; render one density per file",
      );
    }
    byKey.set(key, row);
  }
  if (byKey.size !== lambdas.length * rcs.length) {
    throw new GridError(
      `${byKey.size} cells do not fill a ${lambdas.length} x ${rcs.length} grid`,
    );
  }
  return {
    lambdas,
    rcs,
    cell: (ix, iy) => byKey.get(`${lambdas[ix]}|${rcs[iy]}`)!,
  };
}

function log10(x: number): number {
  return Math.log(x) / Math.LN10;
}

function decadeTicks(min: number, max: number, maxTicks = 8): number[] {
  const lo = Math.ceil(log10(min) - 1e-9);
  const hi = Math.floor(log10(max) + 1e-9);
  const decades: number[] = [];
  for (let d = lo; d <= hi; d++) decades.push(d);
  const stride = Math.max(1, Math.ceil(decades.length / maxTicks));
  return decades.filter((_, i) => i % stride === 0);
}

function fmtDecade(d: number): string {
  return `1e${d}`;
}

export function renderHeatmap(rows: ScanRow[], spec: HeatmapSpec): HeatmapResult {
  const levels = [...spec.contourLevels];
  if (levels.some((l) => !(l > 0))) {
    throw new UsageError("contour levels must be positive seconds");
  }
  if (levels.some((l, i) => i > 0 && l < levels[i - 1])) {
    throw new UsageError("contour levels must be sorted ascending");
  }
  if (spec.colorMin !== undefined && !(spec.colorMin > 0)) {
    throw new UsageError("log color bounds must be positive");
  }
  if (spec.colorMax !== undefined && !(spec.colorMax > 0)) {
    throw new UsageError("log color bounds must be positive");
  }

  const grid = buildGrid(rows);
  const warnings: string[] = [];
  const raster = new Raster(WIDTH, HEIGHT);
  const plot = {
    x: MARGIN.left,
    y: MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: HEIGHT - MARGIN.top - MARGIN.bottom,
  };

  const logL = grid.lambdas.map(log10);
  const logR = grid.rcs.map(log10);
  const lSpan = logL[logL.length - 1] - logL[0];
  const rSpan = logR[logR.length - 1] - logR[0];
  const xOf = (logLambda: number) => plot.x + ((logLambda - logL[0]) / lSpan) * plot.w;
  const yOf = (logRc: number) => plot.y + plot.h - ((logRc - logR[0]) / rSpan) * plot.h;

  // cell boundaries at geometric midpoints (log midpoints), clamped at edges
  const xEdges = [logL[0], ...logL.slice(1).map((v, i) => (v + logL[i]) / 2), logL[logL.length - 1]];
  const yEdges = [logR[0], ...logR.slice(1).map((v, i) => (v + logR[i]) / 2), logR[logR.length - 1]];

  const field: (row: ScanRow) => number | null =
    spec.value === "gamma" ? (r) => r.gamma : (r) => r.coherence;

  const positives = rows
    .map((r) => field(r))
    .filter((v): v is number => v !== null && v > 0);
  const blank = positives.length === 0;
  if (blank) {
    warnings.push("color field has no positive values; rendering a blank field without contours");
  }
  const vMin = spec.colorMin ?? (blank ? 1 : Math.min(...positives));
  const vMax = spec.colorMax ?? (blank ? 10 : Math.max(...positives));
  const logMin = log10(vMin);
  const logMax = log10(vMax);
  const span = logMax - logMin || 1;

  let excludedCells = 0;
  for (let ix = 0; ix < grid.lambdas.length; ix++) {
    for (let iy = 0; iy < grid.rcs.length; iy++) {
      const row = grid.cell(ix, iy);
      const x0 = Math.round(xOf(xEdges[ix]));
      const x1 = Math.round(xOf(xEdges[ix + 1]));
      const y1 = Math.round(yOf(yEdges[iy]));
      const y0 = Math.round(yOf(yEdges[iy + 1]));
      let color;
      const v = field(row);
      if (blank || v === null || v <= 0) {
        color = LIGHT_GREY;
      } else {
        color = colormap((log10(v) - logMin) / span);
      }
      if (row.excluded && spec.shadeExclusions) {
        excludedCells += 1;
        color = WHITE;
      }
      raster.fillRect(x0, y0, Math.max(x1 - x0, 1), Math.max(y1 - y0, 1), color);
    }
  }

  // iso-coherence contours live on the Gamma field: coherence = L <=> Gamma = 1/L
  const contours: ContourInfo[] = [];
  if (!blank) {
    const logGamma: number[][] = grid.lambdas.map((_, ix) =>
      grid.rcs.map((_, iy) => {
        const g = grid.cell(ix, iy).gamma;
        return g > 0 ? log10(g) : Number.NaN;
      }),
    );
    for (const level of levels) {
      const dashed = level > 1.0;
      const segments = marchingSquares(logGamma, log10(1 / level));
      let phase = 0;
      for (const [p, q] of segments) {
        const toPixel = (pt: readonly [number, number]) => {
          const li = Math.min(Math.floor(pt[0]), logL.length - 2);
          const ri = Math.min(Math.floor(pt[1]), logR.length - 2);
          const lx = logL[li] + (pt[0] - li) * (logL[li + 1] - logL[li]);
          const ry = logR[ri] + (pt[1] - ri) * (logR[ri + 1] - logR[ri]);
          return [xOf(lx), yOf(ry)] as const;
        };
        const [x0, y0] = toPixel(p);
        const [x1, y1] = toPixel(q);
        phase = raster.line(x0, y0, x1, y1, BLACK, 2, dashed ? [6, 5] : undefined, phase);
      }
      contours.push({ level, segments: segments.length, dashed });
    }
  }

  // frame and axes
  raster.line(plot.x, plot.y, plot.x + plot.w, plot.y, GREY);
  raster.line(plot.x, plot.y + plot.h, plot.x + plot.w, plot.y + plot.h, BLACK);
  raster.line(plot.x, plot.y, plot.x, plot.y + plot.h, BLACK);
  raster.line(plot.x + plot.w, plot.y, plot.x + plot.w, plot.y + plot.h, GREY);
  for (const d of decadeTicks(grid.lambdas[0], grid.lambdas[grid.lambdas.length - 1])) {
    const x = Math.round(xOf(d));
    if (x < plot.x || x > plot.x + plot.w) continue;
    raster.line(x, plot.y + plot.h, x, plot.y + plot.h + 6, BLACK);
    const label = fmtDecade(d);
    raster.text(x - textWidth(label) / 2, plot.y + plot.h + 12, label, BLACK);
  }
  for (const d of decadeTicks(grid.rcs[0], grid.rcs[grid.rcs.length - 1], 7)) {
    const y = Math.round(yOf(d));
    if (y < plot.y || y > plot.y + plot.h) continue;
    raster.line(plot.x - 6, y, plot.x, y, BLACK);
    const label = fmtDecade(d);
    raster.text(plot.x - 10 - textWidth(label), y - 7, label, BLACK);
  }
  raster.text(
    plot.x + plot.w / 2 - textWidth("lambda (1/s)") / 2,
    HEIGHT - 34,
    "lambda (1/s)",
    BLACK,
  );
  raster.textVertical(18, plot.y + plot.h / 2 + textWidth("r_c (nm)") / 2, "r_c (nm)", BLACK);
  const title = spec.value === "gamma" ? "Gamma (1/s)" : "coherence (s)";
  raster.text(plot.x, 28, title, BLACK);
  if (levels.length > 0 && !blank) {
    const note = `contours: coherence = ${levels.map((l) => `${l}`).join(", ")} s`;
    raster.text(plot.x + plot.w - textWidth(note), 28, note, BLACK);
  }

  // colorbar
  const barX = plot.x + plot.w + 30;
  const barW = 24;
  for (let i = 0; i < plot.h; i++) {
    const t = 1 - i / (plot.h - 1);
    const color = blank ? LIGHT_GREY : colormap(t);
    raster.fillRect(barX, plot.y + i, barW, 1, color);
  }
  raster.line(barX, plot.y, barX + barW, plot.y, BLACK);
  raster.line(barX, plot.y + plot.h, barX + barW, plot.y + plot.h, BLACK);
  if (!blank) {
    raster.text(barX, plot.y - 20, vMax.toExponential(1), BLACK);
    raster.text(barX, plot.y + plot.h + 8, vMin.toExponential(1), BLACK);
  }

  return {
    png: encodePng(WIDTH, HEIGHT, raster.pixels),
    width: WIDTH,
    height: HEIGHT,
    contours,
    excludedCells,
    warnings,
  };
}
