/** Synthetic run directories exercising the documented text formats. */

import { mkdirSync, writeFileSync } from "fs";
import path from "path";

function table(header: string[], rows: number[][]): string {
  return (
    header.join("\t") +
    "\n" +
    rows.map((r) => r.map((v) => String(v)).join("\t")).join("\n") +
    "\n"
  );
}

export function makeWeiLikeRun(root: string): string {
  for (const sub of ["gauges", "profiles", "flags", "stats"]) {
    mkdirSync(path.join(root, sub), { recursive: true });
  }
  const manifest = {
    name: "wei-fixture",
    h0: 1.0,
    x_left: -12.0,
    length: 52.0,
    dx: 0.5,
    scheme: { g: 9.81 },
    bathy_points: [
      [-12, 1],
      [0, 1],
      [35, 0],
      [40, 0],
    ],
    snapshot_tprimes: [16.24, 20.64, 24.03, 25.94],
    gauges: [5.0],
    periodic_wave: null,
  };
  writeFileSync(
    path.join(root, "manifest.json"),
    JSON.stringify(manifest, null, 2) + "\n",
  );
  writeFileSync(path.join(root, "status.txt"), "completed\n");

  const n = 105;
  const xs = Array.from({ length: n }, (_, i) => -12 + 0.5 * i);
  for (let k = 0; k < 4; k++) {
    const tp = manifest.snapshot_tprimes[k];
    const crest = 5 + 5 * k;
    const rows = xs.map((x) => {
      const h = x < 0 ? 1 : Math.max(1 - x / 35, 0);
      const eta = 0.25 * Math.exp(-((x - crest) ** 2) / 4);
      const fb = k === 3 && Math.abs(x - crest - 1) < 2 ? 0 : 1;
      return [x, eta, 3.4 * eta, h, fb];
    });
    writeFileSync(
      path.join(root, "profiles", `profile_${k + 1}_tp${tp}.txt`),
      table(["x[m]", "eta[m]", "q[m2/s]", "h[m]", "f_break[-]"], rows),
    );
  }
  const ts = Array.from({ length: 200 }, (_, i) => 0.05 * i);
  writeFileSync(
    path.join(root, "gauges", "gauge_1_x5.txt"),
    table(
      ["t[s]", "eta[m]"],
      ts.map((t) => [t, 0.2 * Math.exp(-((t - 4) ** 2))]),
    ),
  );
  writeFileSync(
    path.join(root, "flags", "timeline.txt"),
    "t[s]\tn_flagged[-]\tintervals[node:node;...]\n7.9\t6\t60:65\n",
  );
  writeFileSync(
    path.join(root, "stats", "celerity_trace.txt"),
    table(
      ["t[s]", "tprime[-]", "cb_nd[-]", "us_nd[-]", "x_crest[m]", "breaking[0/1]"],
      ts.map((t, i) => [
        t,
        t * 3.13,
        1.1 - 0.02 * t,
        0.3 + 0.09 * t,
        5 + 3 * t,
        i > 150 ? 1 : 0,
      ]),
    ),
  );
  writeFileSync(
    path.join(root, "stats", "breaking.txt"),
    "event\tt[s]\ttprime[-]\tx[m]\nonset\t7.9\t24.7\t22.5\n",
  );
  return root;
}

export function makeHansenLikeRun(root: string): string {
  for (const sub of ["profiles", "stats"]) {
    mkdirSync(path.join(root, sub), { recursive: true });
  }
  const manifest = {
    name: "hansen-fixture",
    h0: 0.36,
    x_left: -12.0,
    length: 26.5,
    dx: 0.25,
    scheme: { g: 9.81 },
    bathy_points: [
      [-12, 0.36],
      [0, 0.36],
      [14.5, -0.0895],
    ],
    snapshot_tprimes: [],
    gauges: [],
    periodic_wave: { period: 2.0 },
  };
  writeFileSync(
    path.join(root, "manifest.json"),
    JSON.stringify(manifest, null, 2) + "\n",
  );
  const n = 107;
  const rows: number[][] = [];
  for (let i = 0; i < n; i++) {
    const x = -12 + 0.25 * i;
    const grow = Math.min(1.5, 1 + Math.max(0, x) / 8);
    const hw = x < 10 ? 0.036 * grow : Math.max(0.05 - 0.01 * (x - 10), 0);
    const setup = x < 8 ? -0.001 : 0.004 * (x - 8);
    rows.push([x, hw, setup]);
  }
  writeFileSync(
    path.join(root, "stats", "wave_stats.txt"),
    table(["x[m]", "Hw[m]", "setup[m]"], rows),
  );
  writeFileSync(
    path.join(root, "stats", "breaking.txt"),
    "event\tt[s]\ttprime[-]\tx[m]\nonset\t20\t104\t8.9\nonset\t22\t114\t9.4\n",
  );
  return root;
}
