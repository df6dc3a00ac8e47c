/**
 * Paper-style figures from a finished run directory:
 *
 * - profile:  free-surface snapshots over the bed, breaking regions marked
 *             by vertical lines
 * - gauges:   surface-elevation time series per gauge, optional overlay of
 *             a user-supplied measurement file per gauge
 * - stats:    wave height and mean water level along the flume
 * - celerity: crest particle velocity vs. front celerity traces with the
 *             first breaking activation circled
 */

import { basename } from "path";
import { existsSync } from "fs";
import {
  RunDir,
  Table,
  breakingRanges,
  column,
  gaugeFiles,
  profileFiles,
  readTable,
  statsFile,
} from "./parse.js";
import { Panel, extentOf, figure } from "./svg.js";

export interface FigureOptions {
  overlays?: string[]; // experimental data files matched to gauges by order
}

export function profileFigure(run: RunDir): string {
  const files = profileFiles(run);
  if (files.length === 0) {
    throw new Error(`no profile snapshots in ${run.root}`);
  }
  const panels: Panel[] = [];
  for (const file of files) {
    const t = readTable(file);
    const x = column(t, "x", basename(file));
    const eta = column(t, "eta", basename(file));
    const h = column(t, "h", basename(file));
    const fb = column(t, "f_break", basename(file));
    const bed = h.map((v) => -v);
    const ext = extentOf(x, [...eta, ...bed.filter((b) => b < 1.0)]);
    const p = new Panel(ext);
    const tp = basename(file).match(/tp([-\d.e]+)/);
    p.title = tp ? `t' = ${tp[1]}` : basename(file);
    p.xLabel = "x [m]";
    p.yLabel = "eta [m]";
    p.line(x, bed, "#7a5230", 1.0);
    p.line(x, eta, "#1464a0", 1.4);
    for (const [a, b] of breakingRanges(x, fb)) {
      p.vline(a, "#c03030");
      p.vline(b, "#c03030");
    }
    panels.push(p);
  }
  return figure(panels, 2);
}

export function gaugesFigure(run: RunDir, opts: FigureOptions = {}): string {
  const files = gaugeFiles(run);
  if (files.length === 0) {
    throw new Error(`no gauge records in ${run.root}`);
  }
  const panels: Panel[] = [];
  files.forEach((file, k) => {
    const t = readTable(file);
    const ts = column(t, "t", basename(file));
    const eta = column(t, "eta", basename(file));
    const p = new Panel(extentOf(ts, eta));
    const xg = basename(file).match(/_x([-\d.e]+)\.txt/);
    p.title = `gauge ${k + 1}` + (xg ? ` (x = ${xg[1]} m)` : "");
    p.xLabel = "t [s]";
    p.yLabel = "eta [m]";
    p.line(ts, eta, "#1464a0", 1.2);
    const overlay = opts.overlays?.[k];
    if (overlay && existsSync(overlay)) {
      const o = readTable(overlay);
      p.line(
        column(o, "t", overlay),
        column(o, "eta", overlay),
        "#c03030",
        1.0,
        "3,3",
      );
    }
    panels.push(p);
  });
  return figure(panels, 2);
}

export function statsFigure(run: RunDir): string {
  const file = statsFile(run, "wave_stats.txt");
  if (!existsSync(file)) {
    throw new Error(`no wave statistics in ${run.root} (run postprocess?)`);
  }
  const t = readTable(file);
  const x = column(t, "x", "wave_stats.txt");
  const hw = column(t, "Hw", "wave_stats.txt");
  const setup = column(t, "setup", "wave_stats.txt");
  const keep = hw.map((v) => Number.isFinite(v));
  const xs = x.filter((_, i) => keep[i]);
  const hws = hw.filter((_, i) => keep[i]);
  const setups = setup.filter((_, i) => keep[i]);

  const left = new Panel(extentOf(xs, hws));
  left.title = "wave height";
  left.xLabel = "x [m]";
  left.yLabel = "Hw [m]";
  left.line(xs, hws, "#1464a0", 1.4);

  const right = new Panel(extentOf(xs, setups));
  right.title = "mean water level";
  right.xLabel = "x [m]";
  right.yLabel = "setup [m]";
  right.line(xs, setups, "#1464a0", 1.4);

  for (const p of [left, right]) {
    for (const [a, b] of breakingSpan(run)) {
      p.vline(a, "#c03030");
      p.vline(b, "#c03030");
    }
  }
  return figure([left, right], 2);
}

/** First/last breaking x-extent from the derived breaking events. */
function breakingSpan(run: RunDir): [number, number][] {
  const file = statsFile(run, "breaking.txt");
  if (!existsSync(file)) return [];
  const t = readTable(file);
  const idx = t.columns.findIndex((c) => c.startsWith("x"));
  if (idx < 0) return [];
  const xs: number[] = [];
  for (const r of t.rows) {
    const v = r[idx];
    if (Number.isFinite(v)) xs.push(v);
  }
  if (xs.length === 0) return [];
  return [[Math.min(...xs), Math.max(...xs)]];
}

export function celerityFigure(run: RunDir): string {
  const file = statsFile(run, "celerity_trace.txt");
  if (!existsSync(file)) {
    throw new Error(`no celerity trace in ${run.root}`);
  }
  const t = readTable(file);
  const tp = column(t, "tprime", "celerity_trace.txt");
  const cb = column(t, "cb_nd", "celerity_trace.txt");
  const us = column(t, "us_nd", "celerity_trace.txt");
  const breaking = column(t, "breaking", "celerity_trace.txt");

  const p = new Panel(extentOf(tp, [...cb, ...us]));
  p.title = `${run.manifest.name}: crest velocity vs front celerity`;
  p.xLabel = "t' [-]";
  p.yLabel = "c_b', u_s' [-]";
  p.line(tp, cb, "#1464a0", 1.4);
  p.line(tp, us, "#208040", 1.4, "5,3");
  const k = breaking.findIndex((b) => b === 1);
  if (k >= 0) {
    p.circle(tp[k], cb[k], 4, "#c03030");
    p.circle(tp[k], us[k], 4, "#c03030");
  }
  return figure([p], 1, 520, 300);
}

export type FigureKind = "profile" | "gauges" | "stats" | "celerity";

export function render(
  kind: FigureKind,
  run: RunDir,
  opts: FigureOptions = {},
): string {
  switch (kind) {
    case "profile":
      return profileFigure(run);
    case "gauges":
      return gaugesFigure(run, opts);
    case "stats":
      return statsFigure(run);
    case "celerity":
      return celerityFigure(run);
    default:
      throw new Error(`unknown figure kind ${kind as string}`);
  }
}
