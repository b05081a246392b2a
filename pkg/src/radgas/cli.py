"""Command-line interface: profiles, run, converge, accept.

Thin argument handling over the library; every subcommand takes a
scenario file and an output directory and leaves flat-file artifacts
(CSV series, JSON reports, a hashed manifest) behind.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .acceptance import run_acceptance
from .elliptic import HalfLineGrid
from .profiles import modified_profile, profile_property_suite
from .runner import (
    EXIT_INVALID,
    EXIT_OK,
    atomic_write_text,
    convergence_study,
    file_sha256,
    run,
    write_json,
)
from .scenario import ScenarioError, load_scenario


def _out_dir(args, scenario=None) -> Path:
    if args.out is not None:
        return Path(args.out)
    if scenario is not None and scenario.out is not None:
        return Path(scenario.out)
    return Path("out")


def _load(path):
    try:
        return load_scenario(path)
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return None


def _cmd_profiles(args) -> int:
    sc = _load(args.scenario)
    if sc is None:
        return EXIT_INVALID
    out = _out_dir(args, sc) / sc.name
    out.mkdir(parents=True, exist_ok=True)
    grid = HalfLineGrid.from_length(sc.n, sc.L)
    artifacts = {}
    for t in sc.snapshots:
        tt = max(float(t), 1e-6) + sc.t0
        b = modified_profile(sc.flux, sc.data, grid, tt, order=3)
        lines = ["x,r,w,u_tilde,q_tilde,R1,R2"]
        for i in range(grid.n):
            lines.append(",".join(repr(float(v)) for v in (
                grid.x[i], b.r[i], b.w[(0, 0)][i], b.u_tilde[i],
                b.q_tilde[i], b.R1[i], b.R2[i])))
        p = out / f"profiles_t{t:g}.csv"
        atomic_write_text(p, "\n".join(lines) + "\n")
        artifacts[p.name] = file_sha256(p)

    times = np.geomspace(max(1.0, sc.t0), max(sc.t_final, 8.0), 10)
    report = profile_property_suite(sc.flux, sc.data, times)
    write_json(out / "profile_properties.json", report)
    artifacts["profile_properties.json"] = file_sha256(out / "profile_properties.json")
    write_json(out / "manifest.json", {
        "scenario": sc.name, "config_hash": sc.config_hash,
        "artifacts": artifacts,
    })
    print(f"profiles written to {out}")
    return EXIT_OK if report["pass"] else 1


def _cmd_run(args) -> int:
    sc = _load(args.scenario)
    if sc is None:
        return EXIT_INVALID
    outcome = run(sc, _out_dir(args, sc), dry_run=args.dry_run)
    if args.dry_run:
        print(f"scenario {sc.name} valid (dry run, nothing written)")
    else:
        print(f"run artifacts in {outcome.out_dir} (exit {outcome.exit_code})")
    return outcome.exit_code


def _cmd_converge(args) -> int:
    sc = _load(args.scenario)
    if sc is None:
        return EXIT_INVALID
    report = convergence_study(sc, levels=args.levels)
    out = _out_dir(args, sc) / sc.name
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "converge.json", report)
    print(f"convergence report in {out / 'converge.json'}")
    if report.get("degenerate"):
        print("errors at round-off: order report degenerate")
        return EXIT_OK
    orders = [o["L1"] for o in report["orders"] if o["L1"] is not None]
    print("observed L1 orders:", ", ".join(f"{o:.2f}" for o in orders))
    return EXIT_OK if report.get("resolved", True) else 1


def _cmd_accept(args) -> int:
    out = Path(args.out) if args.out is not None else Path("out") / "acceptance"
    _, all_passed = run_acceptance(out_dir=out, quick=args.quick)
    print(f"acceptance report in {out}")
    return EXIT_OK if all_passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radgas",
        description="Numerical laboratory for the radiating-gas model "
                    "on the half-line and half-plane.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profiles", help="profile slices and decay-property report")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_profiles)

    p = sub.add_parser("run", help="integrate a scenario and write artifacts")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.add_argument("--dry-run", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("converge", help="grid-refinement self-convergence study")
    p.add_argument("scenario")
    p.add_argument("--out", default=None)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(fn=_cmd_converge)

    p = sub.add_parser("accept", help="full acceptance suite with report")
    p.add_argument("scenario", nargs="?", default=None,
                   help="ignored; criteria pin their own scenarios")
    p.add_argument("--out", default=None)
    p.add_argument("--quick", action="store_true",
                   help="reduced sizes (smoke test, not the pinned criteria)")
    p.set_defaults(fn=_cmd_accept)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
