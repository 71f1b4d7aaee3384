/** Parsers for the two upstream CSV formats. plotkit never recomputes the
 * physics behind these files; it draws what they contain. */

import { SchemaError } from "./errors.js";

export const SCAN_COLUMNS = [
  "lambda_s^-1",
  "rc_nm",
  "density_m^-3GHz^-1",
  "n",
  "N_volumes",
  "Gamma_s^-1",
  "coherence_s",
  "excluded",
] as const;

export interface ScanRow {
  lambda: number;
  rc: number;
  density: number;
  n: number;
  nVolumes: number;
  gamma: number;
  coherence: number | null;
  excluded: boolean;
}

export interface TrajectoryData {
  t: number[];
  /** entry label like "0_1" -> |rho| samples */
  abs: Map<string, number[]>;
  /** entry label -> arg rho samples */
  arg: Map<string, number[]>;
}

function splitLines(text: string): string[] {
  return text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

export function parseScanCsv(text: string): ScanRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError("empty scan file");
  }
  const header = lines[0].split(",");
  const missing = SCAN_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`scan CSV missing columns: ${missing.join(", ")}`);
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: ScanRow[] = [];
  for (const [lineNo, line] of lines.slice(1).entries()) {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new SchemaError(
        `scan CSV row ${lineNo + 2} has ${fields.length} fields, expected ${header.length}`,
      );
    }
    const num = (col: string): number => {
      const raw = fields[index.get(col)!];
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`scan CSV row ${lineNo + 2}: bad ${col} value ${raw!}`);
      }
      return value;
    };
    const coherenceRaw = fields[index.get("coherence_s")!];
    rows.push({
      lambda: num("lambda_s^-1"),
      rc: num("rc_nm"),
      density: num("density_m^-3GHz^-1"),
      n: num("n"),
      nVolumes: num("N_volumes"),
      gamma: num("Gamma_s^-1"),
      coherence: coherenceRaw === "" ? null : num("coherence_s"),
      excluded: fields[index.get("excluded")!] === "true",
    });
  }
  if (rows.length === 0) {
    throw new SchemaError("scan CSV has a header but no data rows");
  }
  return rows;
}

export function parseTrajectoryCsv(text: string): TrajectoryData {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError("empty trajectory file");
  }
  const header = lines[0].split(",");
  if (header[0] !== "t") {
    throw new SchemaError(`trajectory CSV must start with column "t", got ${header[0]!}`);
  }
  const absColumns = new Map<string, number>();
  const argColumns = new Map<string, number>();
  for (const [i, name] of header.entries()) {
    const absMatch = /^abs_rho_(\d+_\d+)$/.exec(name);
    if (absMatch) absColumns.set(absMatch[1], i);
    const argMatch = /^arg_rho_(\d+_\d+)$/.exec(name);
    if (argMatch) argColumns.set(argMatch[1], i);
  }
  if (absColumns.size === 0) {
    throw new SchemaError("trajectory CSV has no abs_rho_i_j columns");
  }
  if (lines.length < 2) {
    throw new SchemaError("trajectory CSV has a header but no samples");
  }

  const t: number[] = [];
  const abs = new Map<string, number[]>([...absColumns.keys()].map((k) => [k, []]));
  const arg = new Map<string, number[]>([...argColumns.keys()].map((k) => [k, []]));
  for (const [lineNo, line] of lines.slice(1).entries()) {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new SchemaError(
        `trajectory CSV row ${lineNo + 2} has ${fields.length} fields, expected ${header.length}`,
      );
    }
    const tVal = Number(fields[0]);
    if (!Number.isFinite(tVal)) {
      throw new SchemaError(`trajectory CSV row ${lineNo + 2}: bad t value ${fields[0]!}`);
    }
    t.push(tVal);
    for (const [label, col] of absColumns) {
      const value = Number(fields[col]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`trajectory CSV row ${lineNo + 2}: bad abs_rho_${label}`);
      }
      abs.get(label)!.push(value);
    }
    for (const [label, col] of argColumns) {
      arg.get(label)!.push(Number(fields[col]));
    }
  }
  return { t, abs, arg };
}
