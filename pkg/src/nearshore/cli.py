"""Command-line interface.

Subcommands::

    nearshore list
    nearshore run <scenario>... [--detector X] [--frs-cr X] [--dx X]
                  [--cfl X] [--end-time X] [--out DIR] [--override k=v ...]
                  [--jobs N] [--no-calibrate] [--progress]
    nearshore calibrate-source (--scenario NAME | -A ... -T ... --h0 ...)
    nearshore postprocess <RUNDIR>

``run`` accepts catalog names, manifest files or existing run directories.
Output goes to ``--out`` or ``$NEARSHORE_OUT`` (default ``./runs``).  Errors
exit non-zero with a single ``error:<category>: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .calibration import calibrate_source, ensure_calibrated
from .forcing import PeriodicSpec
from .runio import postprocess, write_run
from .scenarios import (CatalogError, Scenario, apply_overrides,
                        builtin_scenario, scenario_names)

OUT_ENV = "NEARSHORE_OUT"


class CliError(RuntimeError):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _fail(category: str, message: str) -> int:
    print(f"error:{category}: {message}", file=sys.stderr)
    return 1


def _load_scenario(token: str) -> Scenario:
    path = Path(token)
    if path.is_dir() and (path / "manifest.json").exists():
        path = path / "manifest.json"
    if path.is_file():
        try:
            with open(path) as f:
                return Scenario.from_manifest(json.load(f))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CliError("io", f"cannot load manifest {token}: {exc}")
    try:
        return builtin_scenario(token)
    except CatalogError as exc:
        raise CliError("catalog", str(exc.args[0]))


def _configure(scn: Scenario, args) -> Scenario:
    overrides = {}
    if args.detector:
        overrides["detector.kind"] = args.detector
    if args.frs_cr is not None:
        overrides["detector.fr_s_cr"] = args.frs_cr
    if args.dx is not None:
        overrides["dx"] = args.dx
    if args.cfl is not None:
        overrides["scheme.cfl"] = args.cfl
    if args.end_time is not None:
        overrides["t_end"] = args.end_time
    for item in args.override or []:
        if "=" not in item:
            raise CliError("usage", f"override must be key=value: {item!r}")
        key, _, value = item.partition("=")
        overrides[key] = value
    try:
        return apply_overrides(scn, overrides)
    except (CatalogError, ValueError) as exc:
        raise CliError("usage", str(exc))


def _run_one(scn: Scenario, outdir: str, calibrate: bool,
             progress: bool) -> tuple[str, bool]:
    from .timeloop import run

    if calibrate:
        scn = ensure_calibrated(scn, verbose=progress)
    result = run(scn, progress=progress)
    write_run(result, outdir)
    return outdir, result.truncated


def cmd_run(args) -> int:
    out_root = Path(args.out or os.environ.get(OUT_ENV, "runs"))
    jobs = []
    for token in args.scenario:
        scn = _configure(_load_scenario(token), args)
        tag = f"-{scn.detector.kind}"
        if scn.detector.kind == "physical":
            tag += f"-frs{scn.detector.fr_s_cr:g}"
        outdir = out_root / f"{scn.name}{tag}"
        jobs.append((scn, str(outdir)))

    truncated = False
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, scn, outdir,
                                   not args.no_calibrate, False)
                       for scn, outdir in jobs]
            for fut in futures:
                outdir, trunc = fut.result()
                truncated |= trunc
                print(outdir)
    else:
        for scn, outdir in jobs:
            outdir, trunc = _run_one(scn, outdir, not args.no_calibrate,
                                     args.progress)
            truncated |= trunc
            print(outdir)
    if truncated:
        return _fail("run", "one or more runs were truncated "
                            "(see status.txt in the run directory)")
    return 0


def cmd_list(_args) -> int:
    for name in scenario_names():
        scn = builtin_scenario(name)
        print(f"{name:16s} {scn.description}")
    return 0


def cmd_calibrate(args) -> int:
    if args.scenario:
        scn = builtin_scenario(args.scenario)
        if scn.periodic_wave is None:
            return _fail("calibration",
                         f"scenario {args.scenario} has no wave maker")
        spec = scn.periodic_wave
        h0, g = scn.h0, scn.scheme.g
    else:
        if args.amplitude is None or args.period is None or args.h0 is None:
            return _fail("usage",
                         "need --scenario or -A/-T/--h0 for calibration")
        spec = PeriodicSpec(args.amplitude, args.period, 0.0)
        h0, g = args.h0, 9.81
    width, strength = calibrate_source(spec, h0, g, verbose=True)
    print(f"width={width:.12g} strength={strength:.12g}")
    return 0


def cmd_postprocess(args) -> int:
    try:
        postprocess(args.rundir)
    except FileNotFoundError as exc:
        return _fail("io", str(exc))
    print(args.rundir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nearshore",
                                description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run one or more scenarios")
    pr.add_argument("scenario", nargs="+",
                    help="catalog name, manifest file or run directory")
    pr.add_argument("--detector",
                    choices=["local", "hybrid", "physical", "boussinesq",
                             "shallow_water"])
    pr.add_argument("--frs-cr", type=float, dest="frs_cr",
                    help="critical free-surface Froude for the physical "
                         "criterion")
    pr.add_argument("--dx", type=float)
    pr.add_argument("--cfl", type=float)
    pr.add_argument("--end-time", type=float, dest="end_time")
    pr.add_argument("--out", help="output root (default $NEARSHORE_OUT or "
                                  "./runs)")
    pr.add_argument("--override", action="append", metavar="KEY=VALUE",
                    help="dotted-path scenario override, repeatable")
    pr.add_argument("--jobs", type=int, default=1,
                    help="run scenarios in parallel")
    pr.add_argument("--no-calibrate", action="store_true",
                    help="skip wave-maker calibration (linear estimate)")
    pr.add_argument("--progress", action="store_true")
    pr.set_defaults(func=cmd_run)

    pl = sub.add_parser("list", help="list built-in scenarios")
    pl.set_defaults(func=cmd_list)

    pc = sub.add_parser("calibrate-source", help="calibrate the wave maker")
    pc.add_argument("--scenario")
    pc.add_argument("-A", "--amplitude", type=float)
    pc.add_argument("-T", "--period", type=float)
    pc.add_argument("--h0", type=float)
    pc.set_defaults(func=cmd_calibrate)

    pp = sub.add_parser("postprocess", help="recompute statistics of a run")
    pp.add_argument("rundir")
    pp.set_defaults(func=cmd_postprocess)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        return _fail(exc.category, str(exc))
    except CatalogError as exc:
        return _fail("catalog", str(exc.args[0]))


if __name__ == "__main__":
    sys.exit(main())
