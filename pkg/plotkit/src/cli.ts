#!/usr/bin/env node
/**
 * plotkit: offline PNG rendering of csllab output files.
 *
 *   plotkit heatmap <scan.csv> [--value gamma|coherence] [--cmin V --cmax V]
 *                   [--contours 1,10] [--no-exclusion-shading] --out fig.png
 *   plotkit decay <traj.csv> [--analytic RATE] --out fig.png
 *
 * Exit codes: 0 ok, 2 usage, 3 schema or grid mismatch.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parseScanCsv, parseTrajectoryCsv } from "./csv.js";
import { GridError, SchemaError, UsageError } from "./errors.js";
import { DEFAULT_HEATMAP_SPEC, renderHeatmap, type HeatmapSpec } from "./heatmap.js";
import { renderDecay } from "./decay.js";

interface Flags {
  positional: string[];
  options: Map<string, string | true>;
}

function parseArgs(argv: string[]): Flags {
  const positional: string[] = [];
  const options = new Map<string, string | true>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith("--")) {
      const name = arg.slice(2);
      if (name === "no-exclusion-shading") {
        options.set(name, true);
      } else {
        const value = argv[++i];
        if (value === undefined) throw new UsageError(`--${name} needs a value`);
        options.set(name, value);
      }
    } else {
      positional.push(arg);
    }
  }
  return { positional, options };
}

function requireOut(flags: Flags): string {
  const out = flags.options.get("out");
  if (typeof out !== "string") throw new UsageError("--out <png path> is required");
  return out;
}

function numberFlag(flags: Flags, name: string): number | undefined {
  const raw = flags.options.get(name);
  if (raw === undefined) return undefined;
  const value = Number(raw);
  if (!Number.isFinite(value)) throw new UsageError(`--${name} must be a number, got ${String(raw)}`);
  return value;
}

function cmdHeatmap(flags: Flags): number {
  if (flags.positional.length !== 1) throw new UsageError("heatmap needs exactly one CSV path");
  const out = requireOut(flags);
  const valueRaw = flags.options.get("value") ?? "gamma";
  if (valueRaw !== "gamma" && valueRaw !== "coherence") {
    throw new UsageError(`--value must be gamma or coherence, got ${String(valueRaw)}`);
  }
  const contoursRaw = flags.options.get("contours");
  const spec: HeatmapSpec = {
    ...DEFAULT_HEATMAP_SPEC,
    value: valueRaw,
    colorMin: numberFlag(flags, "cmin"),
    colorMax: numberFlag(flags, "cmax"),
    shadeExclusions: !flags.options.has("no-exclusion-shading"),
    contourLevels:
      typeof contoursRaw === "string"
        ? contoursRaw.split(",").map((s) => Number(s))
        : [...DEFAULT_HEATMAP_SPEC.contourLevels],
  };
  const rows = parseScanCsv(readFileSync(flags.positional[0], "utf-8"));
  const result = renderHeatmap(rows, spec);
  writeFileSync(out, result.png);
  for (const warning of result.warnings) console.error(`warning: ${warning}`);
  const contourNote = result.contours
    .map((c) => `${c.level} s: ${c.segments} segments${c.dashed ? " (dashed)" : ""}`)
    .join("; ");
  console.log(
    `wrote ${out} (${result.width}x${result.height}); excluded cells shaded: ${result.excludedCells}` +
      (contourNote ? `; contours ${contourNote}` : ""),
  );
  return 0;
}

function cmdDecay(flags: Flags): number {
  if (flags.positional.length !== 1) throw new UsageError("decay needs exactly one CSV path");
  const out = requireOut(flags);
  const analytic = numberFlag(flags, "analytic") ?? null;
  const traj = parseTrajectoryCsv(readFileSync(flags.positional[0], "utf-8"));
  const result = renderDecay(traj, analytic);
  writeFileSync(out, result.png);
  for (const warning of result.warnings) console.error(`warning: ${warning}`);
  console.log(`wrote ${out} (${result.width}x${result.height}); ${result.legend.join("; ")}`);
  return 0;
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "heatmap") return cmdHeatmap(parseArgs(rest));
    if (command === "decay") return cmdDecay(parseArgs(rest));
    throw new UsageError("usage: plotkit <heatmap|decay> <csv> [options] --out fig.png");
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    if (err instanceof SchemaError || err instanceof GridError) {
      console.error(`input error: ${err.message}`);
      return 3;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(`input error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
