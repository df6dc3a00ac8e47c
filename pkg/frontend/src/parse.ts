/**
 * Readers for the simulator's run-directory text artifacts.
 *
 * Everything is plain tab-separated text with a header line naming columns
 * (units in brackets); the manifest is JSON. The plot component never
 * touches the simulator itself.
 */

import { readFileSync, readdirSync, existsSync } from "fs";
import path from "path";

export interface Table {
  columns: string[];
  rows: number[][];
}

export class NamedColumnError extends Error {
  constructor(file: string, column: string, available: string[]) {
    super(
      `column ${column} not found in ${file} (has: ${available.join(", ")})`,
    );
  }
}

export function readTable(file: string): Table {
  const text = readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  const columns = lines[0].split("\t").map((c) => c.trim());
  const rows = lines.slice(1).map((l) => l.split("\t").map(Number));
  return { columns, rows };
}

/** Column values by header name, unit bracket optional in the query. */
export function column(table: Table, name: string, file = "table"): number[] {
  let idx = table.columns.indexOf(name);
  if (idx < 0) {
    idx = table.columns.findIndex((c) => c.split("[")[0] === name);
  }
  if (idx < 0) {
    throw new NamedColumnError(file, name, table.columns);
  }
  return table.rows.map((r) => r[idx]);
}

export interface Manifest {
  name: string;
  h0: number;
  scheme: { g: number };
  bathy_points: [number, number][];
  snapshot_tprimes: number[];
  gauges: number[];
  periodic_wave: { period: number } | null;
  [key: string]: unknown;
}

export interface RunDir {
  root: string;
  manifest: Manifest;
}

export function openRun(root: string): RunDir {
  const manifestPath = path.join(root, "manifest.json");
  if (!existsSync(manifestPath)) {
    throw new Error(`not a run directory (no manifest.json): ${root}`);
  }
  const manifest = JSON.parse(readFileSync(manifestPath, "utf-8")) as Manifest;
  return { root, manifest };
}

export function profileFiles(run: RunDir): string[] {
  const dir = path.join(run.root, "profiles");
  if (!existsSync(dir)) return [];
  return readdirSync(dir)
    .filter((f) => f.startsWith("profile_") && f.endsWith(".txt"))
    .sort((a, b) => {
      const na = Number(a.split("_")[1]);
      const nb = Number(b.split("_")[1]);
      return na - nb;
    })
    .map((f) => path.join(dir, f));
}

export function gaugeFiles(run: RunDir): string[] {
  const dir = path.join(run.root, "gauges");
  if (!existsSync(dir)) return [];
  return readdirSync(dir)
    .filter((f) => f.startsWith("gauge_") && f.endsWith(".txt"))
    .sort((a, b) => {
      const na = Number(a.split("_")[1]);
      const nb = Number(b.split("_")[1]);
      return na - nb;
    })
    .map((f) => path.join(dir, f));
}

export function statsFile(run: RunDir, name: string): string {
  return path.join(run.root, "stats", name);
}

/** Contiguous x-ranges with f_break = 0 in a profile table. */
export function breakingRanges(
  x: number[],
  fBreak: number[],
): [number, number][] {
  const out: [number, number][] = [];
  let start: number | null = null;
  for (let i = 0; i < x.length; i++) {
    const breaking = fBreak[i] === 0;
    if (breaking && start === null) start = x[i];
    if (!breaking && start !== null) {
      out.push([start, x[i - 1]]);
      start = null;
    }
  }
  if (start !== null) out.push([start, x[x.length - 1]]);
  return out;
}
