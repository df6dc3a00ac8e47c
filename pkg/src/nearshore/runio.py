"""Run-directory writer and offline post-processing.

Layout written by :func:`write_run`::

    <dir>/manifest.json          full scenario echo (reproducible input)
    <dir>/status.txt             completed | truncated: <reason>
    <dir>/gauges/gauge_<k>_x<pos>.txt      t[s]  eta[m]
    <dir>/profiles/profile_<k>_tp<t'>.txt  x[m] eta[m] q[m2/s] h[m] f_break[-]
    <dir>/profiles/history.txt   eta(t, x) matrix sampled at history_dt
    <dir>/flags/timeline.txt     t[s]  n_flagged[-]  intervals
    <dir>/stats/celerity_trace.txt

:func:`postprocess` derives breaking events and wave statistics purely from
those text artifacts, so it can be re-run offline.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from . import analysis
from .scenarios import Scenario

FMT = "%.12g"


def _write_table(path: Path, header: list, rows) -> None:
    with open(path, "w") as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join(FMT % v if isinstance(v, (int, float))
                              else str(v) for v in row) + "\n")


def read_table(path) -> tuple[list, np.ndarray]:
    """Read a tab-separated table; returns (column names, float matrix)."""
    with open(path) as f:
        header = f.readline().strip().split("\t")
        data = np.loadtxt(f, ndmin=2)
    return header, data


def write_run(result, outdir) -> Path:
    """Flush a RunResult to a run directory (partial results included)."""
    out = Path(outdir)
    for sub in ("gauges", "profiles", "flags", "stats"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    scn: Scenario = result.scenario

    with open(out / "manifest.json", "w") as f:
        json.dump(scn.to_manifest(), f, indent=2, sort_keys=True)
        f.write("\n")

    status = "completed"
    if result.truncated:
        status = f"truncated: {result.truncation_reason}"
    (out / "status.txt").write_text(status + "\n")

    for k, xg in enumerate(scn.gauges):
        rows = ((t, res[k]) for t, res in zip(result.gauge_times,
                                              result.gauge_eta))
        _write_table(out / "gauges" / f"gauge_{k + 1}_x{xg:g}.txt",
                     ["t[s]", "eta[m]"], rows)

    x = scn.grid.nodes()
    h = scn.bathymetry().h
    for k, (t, eta, q, fb) in enumerate(result.profiles):
        tp = scn.tprime(t)
        rows = zip(x, eta, q, h, fb)
        _write_table(out / "profiles" / f"profile_{k + 1}_tp{tp:.4g}.txt",
                     ["x[m]", "eta[m]", "q[m2/s]", "h[m]", "f_break[-]"],
                     rows)

    if result.history:
        with open(out / "profiles" / "history.txt", "w") as f:
            f.write("t[s]\t" + "\t".join(FMT % xv for xv in x) + "\n")
            for t, eta in result.history:
                f.write(FMT % t + "\t" + "\t".join(FMT % v for v in eta)
                        + "\n")

    with open(out / "flags" / "timeline.txt", "w") as f:
        f.write("t[s]\tn_flagged[-]\tintervals[node:node;...]\n")
        for t, intervals in result.flag_timeline:
            span = ";".join(f"{i0}:{i1}" for i0, i1 in intervals)
            count = sum(i1 - i0 + 1 for i0, i1 in intervals)
            f.write(f"{FMT % t}\t{count}\t{span or '-'}\n")

    c0 = math.sqrt(scn.scheme.g * scn.h0)
    rows = ((s.t, scn.tprime(s.t), s.c_b / c0, s.u_s / c0, s.x_crest,
             int(s.breaking)) for s in result.crest_trace)
    _write_table(out / "stats" / "celerity_trace.txt",
                 ["t[s]", "tprime[-]", "cb_nd[-]", "us_nd[-]", "x_crest[m]",
                  "breaking[0/1]"], rows)

    postprocess(out)
    return out


def load_manifest(rundir) -> Scenario:
    with open(Path(rundir) / "manifest.json") as f:
        return Scenario.from_manifest(json.load(f))


def read_timeline(rundir):
    """Parse flags/timeline.txt into (t, [(i0, i1), ...]) tuples."""
    path = Path(rundir) / "flags" / "timeline.txt"
    if not path.exists():
        return []
    out = []
    with open(path) as f:
        f.readline()
        for line in f:
            t_s, _count, span = line.rstrip("\n").split("\t")
            intervals = []
            if span != "-":
                for part in span.split(";"):
                    a, b = part.split(":")
                    intervals.append((int(a), int(b)))
            out.append((float(t_s), intervals))
    return out


def _chain_lineages(timeline):
    """Re-derive onset/termination events from a flag timeline."""
    onsets = []
    terminations = []
    active = []  # (i0, i1, onset_t, onset_center)
    for t, intervals in timeline:
        nxt = []
        for i0, i1 in intervals:
            match = next((lin for lin in active
                          if i0 <= lin[1] and i1 >= lin[0]), None)
            if match is None:
                nxt.append((i0, i1, t, 0.5 * (i0 + i1)))
            else:
                nxt.append((i0, i1, match[2], match[3]))
        for lin in active:
            if not any(i0 <= lin[1] and i1 >= lin[0] for i0, i1 in intervals):
                terminations.append((t, lin[2]))
        for lin in nxt:
            if lin[2] == t and all(o[0] != t or o[1] != lin[3]
                                   for o in onsets):
                onsets.append((t, lin[3]))
        active = nxt
    return onsets, terminations, active


def postprocess(rundir) -> None:
    """Derive breaking events and wave statistics from run artifacts."""
    out = Path(rundir)
    if not (out / "manifest.json").exists():
        raise FileNotFoundError(f"no manifest in {out}")
    scn = load_manifest(out)
    g = scn.scheme.g
    (out / "stats").mkdir(exist_ok=True)

    timeline = read_timeline(out)
    onsets, terminations, active = _chain_lineages(timeline)
    x = scn.grid.nodes()
    with open(out / "stats" / "breaking.txt", "w") as f:
        f.write("event\tt[s]\ttprime[-]\tx[m]\n")
        for t, center in onsets:
            xc = float(np.interp(center, np.arange(x.size), x))
            f.write(f"onset\t{FMT % t}\t{FMT % scn.tprime(t)}\t{FMT % xc}\n")
        for t, onset_t in terminations:
            f.write(f"termination\t{FMT % t}\t{FMT % scn.tprime(t)}\t"
                    f"{FMT % float('nan')}\n")

    # per-gauge wave statistics over the trailing window
    gauge_files = sorted((out / "gauges").glob("gauge_*.txt")) \
        if (out / "gauges").exists() else []
    if gauge_files and scn.periodic_wave is not None:
        period = scn.periodic_wave.period
        rows = []
        for k, path in enumerate(gauge_files):
            _, data = read_table(path)
            if data.size == 0:
                continue
            t, eta = data[:, 0], data[:, 1]
            start = max(t[0], t[-1] - 6.0 * period)
            sel = t >= start
            try:
                st = analysis.wave_by_wave(t[sel], eta[sel])
            except analysis.InsufficientDataError:
                continue
            xg = scn.gauges[k] if k < len(scn.gauges) else float("nan")
            rows.append((xg, st.wave_height, st.mean_level, st.n_waves))
        _write_table(out / "stats" / "gauge_stats.txt",
                     ["x[m]", "Hw[m]", "setup[m]", "n_waves[-]"], rows)

    hist_path = out / "profiles" / "history.txt"
    if hist_path.exists():
        with open(hist_path) as f:
            header = f.readline().rstrip("\n").split("\t")
            xs = np.array([float(v) for v in header[1:]])
            data = np.loadtxt(f, ndmin=2)
        times = data[:, 0]
        etas = data[:, 1:]
        solitary = scn.periodic_wave is None
        window = 0.0 if solitary else max(
            float(times[0]), float(times[-1]) - 6.0 * scn.periodic_wave.period)
        height, level = analysis.spatial_wave_stats(times, etas, window,
                                                    solitary=solitary)
        rows = zip(xs, height, level)
        _write_table(out / "stats" / "wave_stats.txt",
                     ["x[m]", "Hw[m]", "setup[m]"], rows)
