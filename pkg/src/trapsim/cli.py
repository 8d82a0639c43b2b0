"""Command line front end.

Exit codes: 0 success, 2 configuration problem, 3 solver failure,
4 ion lost during integration.  Manifest mismatches from ``run --check``
exit 1.  Set TRAPSIM_OUTDIR to redirect output files.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import config as cfg
from . import runner
from .errors import ConfigError, IonLostError, TrapSimError

log = logging.getLogger("trapsim")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_LOST = 4


def _outdir(args) -> str:
    d = args.outdir or os.environ.get("TRAPSIM_OUTDIR") or os.getcwd()
    os.makedirs(d, exist_ok=True)
    return d


def _parse_range(spec: str, what: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{what} wants lo:hi:count, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {spec!r}") from None
    if n < 2:
        raise ConfigError(f"{what}: count must be at least 2")
    return np.linspace(lo, hi, n)


def _cmd_run(args) -> int:
    outdir = _outdir(args)
    names = list(args.scenario)
    if args.all:
        names.extend(n for n in runner.list_bundled_scenarios()
                     if n not in names)
    if not names:
        raise ConfigError("no scenarios given (name a file or use --all)")

    if len(names) > 1:
        results = runner.run_all(names, outdir, workers=args.workers)
    else:
        results = {names[0]: runner.run_scenario(names[0], outdir)}

    code = EXIT_OK
    for name in names:
        res = results[name]
        if isinstance(res, Exception):
            print(f"== {name}: {res}", file=sys.stderr)
            code = max(code, _error_code(res))
            continue
        print(f"== {name}")
        print(res.to_text())
        if res.status != "ok":
            code = max(code, EXIT_LOST)
        if args.check:
            failures = _check_result(name, res)
            if failures is None:
                print("no expected-output manifest found")
            elif failures:
                print("manifest check FAILED:")
                for f in failures:
                    print(f"  {f}")
                code = max(code, EXIT_FAIL)
            else:
                print("manifest check passed")
    return code


def _check_result(name, report):
    base = os.path.basename(name)
    stem = base[:-4] if base.endswith(".cfg") else base
    manifest = None
    if os.path.exists(name) and name.endswith(".cfg"):
        sibling = name[:-4] + ".json"
        if os.path.exists(sibling):
            manifest = runner.load_manifest(sibling)
    if manifest is None:
        manifest = runner.manifest_for(stem)
    if manifest is None:
        return None
    return runner.check_manifest(report, manifest)


def _cmd_map(args) -> int:
    outdir = _outdir(args)
    scenario, _ = runner._resolve_scenario(args.scenario)
    out = args.out or os.path.join(
        outdir, f"{scenario.name}_map_{args.plane}.csv")
    half = None
    if args.extent:
        half = cfg._parse_quantity(args.extent, "length", "--extent", 0,
                                   "extent")
    runner.export_potential_map(scenario, args.plane, args.n, out,
                                half_extent=half)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    result = runner.compare_methods(args.scenario, n_points=args.points)
    print(result.to_text())
    ok = result.potential_mean["bem"] < result.potential_mean["fdm"]
    print("BEM is the more accurate method here" if ok else
          "warning: FDM came out more accurate on this configuration")
    return EXIT_OK


def _cmd_stability(args) -> int:
    from .mathieu import stability_grid
    a = _parse_range(args.a_range, "--a-range")
    q = _parse_range(args.q_range, "--q-range")
    grid = stability_grid(a, q)
    out = args.out or os.path.join(_outdir(args), "stability.csv")
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("a,q,stable\n")
        for i, av in enumerate(a):
            for j, qv in enumerate(q):
                fh.write(f"{float(av)!r},{float(qv)!r},"
                         f"{int(grid[i, j])}\n")
    print(f"wrote {out}: {int(grid.sum())} of {grid.size} points stable")
    return EXIT_OK


def _cmd_validate(args) -> int:
    scenario, source = runner._resolve_scenario(args.scenario)
    geometry = runner.build_trap(scenario)
    runner.build_drive(scenario, geometry)
    species = runner.ion_species(scenario)
    print(f"{source}: ok")
    print(f"  trap {scenario.trap} with {geometry.n_panels} panels, "
          f"electrodes {geometry.electrode_names}")
    print(f"  ion {species.label}, rf {scenario.rf_frequency / 1e6:g} MHz, "
          f"{scenario.simulation.duration * 1e3:g} ms "
          f"({scenario.simulation.field_method})")
    try:
        params = runner.stability_estimate(scenario, geometry, species)
        est, _ = runner.search_bands(params, scenario.rf_frequency)
        line = "  ".join(f"f_{u} ~ {est[u] / 1e6:.4f} MHz"
                         for u in ("x", "y", "z") if est[u] > 0)
        print(f"  predicted: {line}")
        print(f"  q_z = {params.q_z:+.4f}, a_z = {params.a_z:+.3e}")
    except TrapSimError as exc:
        print(f"  no stability estimate: {exc}")
    return EXIT_OK


def _error_code(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, IonLostError):
        return EXIT_LOST
    if isinstance(exc, TrapSimError):
        return EXIT_SOLVER
    raise exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trapsim",
        description="RF ion trap simulator: fields, trajectories, spectra.")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="-v for progress, -vv for debug output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute scenario pipelines")
    p.add_argument("scenario", nargs="*",
                   help="scenario file or bundled scenario name")
    p.add_argument("--all", action="store_true",
                   help="also run every bundled scenario")
    p.add_argument("--outdir", help="output directory")
    p.add_argument("--check", action="store_true",
                   help="compare the report against the expected-output "
                        "manifest")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel scenario workers")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("map", help="potential map CSV on a plane at t = 0")
    p.add_argument("scenario")
    p.add_argument("--plane", default="zx", choices=sorted(runner._PLANES))
    p.add_argument("--n", type=int, default=201, help="samples per axis")
    p.add_argument("--extent", help="half extent with unit, e.g. '0.2 mm'")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--outdir")
    p.set_defaults(fn=_cmd_map)

    p = sub.add_parser("compare",
                       help="BEM vs FDM accuracy on the ideal quadrupole")
    p.add_argument("scenario")
    p.add_argument("--points", type=int, default=400)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("stability", help="Mathieu stability grid CSV")
    p.add_argument("--a-range", default="-0.2:0.2:81")
    p.add_argument("--q-range", default="0:1:101")
    p.add_argument("--out")
    p.add_argument("--outdir")
    p.set_defaults(fn=_cmd_stability)

    p = sub.add_parser("validate",
                       help="check a scenario without solving fields")
    p.add_argument("scenario")
    p.set_defaults(fn=_cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except TrapSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _error_code(exc)


if __name__ == "__main__":
    sys.exit(main())
