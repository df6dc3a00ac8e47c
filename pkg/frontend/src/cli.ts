#!/usr/bin/env node
/**
 * nearshore-plot <kind> <run-dir> [-o out.svg] [--overlay file ...]
 *
 * kind: profile | gauges | stats | celerity
 *
 * Renders one figure from the text artifacts of a finished run directory;
 * never modifies the run directory.
 */

import { writeFileSync } from "fs";
import path from "path";
import { FigureKind, render } from "./figures.js";
import { openRun } from "./parse.js";

export function main(argv: string[]): number {
  const args = [...argv];
  const overlays: string[] = [];
  let out = "";
  const positional: string[] = [];
  while (args.length) {
    const a = args.shift()!;
    if (a === "-o" || a === "--out") {
      out = args.shift() ?? "";
    } else if (a === "--overlay") {
      const f = args.shift();
      if (f) overlays.push(f);
    } else {
      positional.push(a);
    }
  }
  if (positional.length !== 2) {
    console.error(
      "usage: nearshore-plot <profile|gauges|stats|celerity> <run-dir> " +
        "[-o out.svg] [--overlay file ...]",
    );
    return 2;
  }
  const [kind, runDir] = positional;
  if (!["profile", "gauges", "stats", "celerity"].includes(kind)) {
    console.error(`error: unknown figure kind ${kind}`);
    return 2;
  }
  try {
    const run = openRun(runDir);
    const svg = render(kind as FigureKind, run, { overlays });
    const target = out || path.join(".", `${run.manifest.name}-${kind}.svg`);
    writeFileSync(target, svg);
    console.log(target);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invoked = process.argv[1] ?? "";
if (invoked.endsWith("cli.ts") || invoked.endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
