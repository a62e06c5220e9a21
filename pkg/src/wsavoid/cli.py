"""Command-line front end: simulate, sweep, verify, demo.

Exit codes are a stable contract: 0 success, 1 verification/result failure,
2 input error (bad arguments, unreadable or invalid scenario), 3 runtime
evaluation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import demos, verify
from .errors import AvoidanceError
from .flow import Mode, SignPreference
from .integrator import GridSpec, Outcome, simulate, sweep_field
from .scenario import (
    format_scenario,
    parse_scenario,
    write_field,
    write_trajectory,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3

# Override namespaces consumed by individual commands rather than the
# scenario schema.
_GRID_KEYS = {"grid.min", "grid.max", "grid.res"}
_VERIFY_KEYS = {"verify.lambda_sign", "verify.scenarios"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsavoid",
        description="Workspace-constrained obstacle-avoidance simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_scenario in (
        ("simulate", True),
        ("sweep", True),
        ("verify", False),
        ("demo", False),
    ):
        p = sub.add_parser(name)
        if needs_scenario:
            p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a scenario key (repeatable), e.g. flow.sign_pref=opposite",
        )
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument(
            "--guard", choices=("on", "off"), help="shorthand for integrator.guard"
        )
    return parser


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _load(args, overrides) -> "Scenario":
    path = Path(args.scenario)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read scenario file {path}: {exc}") from exc
    return parse_scenario(text, overrides)


def _summary(name: str, traj) -> str:
    outcome = traj.outcome.value if traj.error is None else f"error({traj.error})"
    min_go = "-" if traj.stats.min_gamma_o is None else f"{traj.stats.min_gamma_o:.6f}"
    return (
        f"{name}: {outcome} steps={traj.stats.steps}"
        f" min_gamma_o={min_go} max_gamma_w={traj.stats.max_gamma_w:.6f}"
        f" transitions={traj.stats.mode_transitions}"
    )


def cmd_simulate(args) -> int:
    overrides = _parse_overrides(args.overrides)
    if args.guard:
        overrides["integrator.guard"] = args.guard
    scenario = _load(args, overrides)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = "traj_baseline" if scenario.flow.baseline else "traj"
    prefix += f"_{scenario.flow.sign_pref.value}"
    any_error = False
    all_reached = True
    for i, start in enumerate(scenario.starts):
        traj = simulate(scenario, start=start)
        name = f"{prefix}_{i:03d}"
        write_trajectory(traj, out_dir / f"{name}.csv")
        print(_summary(name, traj))
        if traj.outcome is Outcome.ERROR:
            any_error = True
        elif traj.outcome is not Outcome.REACHED_TARGET:
            all_reached = False
    if any_error:
        return EXIT_RUNTIME
    return EXIT_OK if all_reached else EXIT_FAIL


def _grid_from_overrides(scenario, grid_overrides: dict[str, str]) -> GridSpec:
    from .scenario import _parse_vec

    ws = scenario.workspace
    mins = ws.center - ws.axes
    maxs = ws.center + ws.axes
    res = (10, 10, 10)
    if "grid.min" in grid_overrides:
        mins = _parse_vec(grid_overrides["grid.min"], 0)
    if "grid.max" in grid_overrides:
        maxs = _parse_vec(grid_overrides["grid.max"], 0)
    if "grid.res" in grid_overrides:
        res_vec = _parse_vec(grid_overrides["grid.res"], 0)
        res = tuple(int(r) for r in res_vec)
    return GridSpec(mins=mins, maxs=maxs, res=res)


def cmd_sweep(args) -> int:
    overrides = _parse_overrides(args.overrides)
    if args.guard:
        overrides["integrator.guard"] = args.guard
    grid_overrides = {k: overrides.pop(k) for k in list(overrides) if k in _GRID_KEYS}
    scenario = _load(args, overrides)
    grid = _grid_from_overrides(scenario, grid_overrides)
    field = sweep_field(scenario, grid)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "field.csv"
    write_field(field, path)
    n_valid = int((field.mode >= 0).sum())
    print(f"field: {len(field.xi)} points ({n_valid} in domain) -> {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    overrides = _parse_overrides(args.overrides)
    unknown = set(overrides) - _VERIFY_KEYS
    if unknown:
        raise ValueError(f"unknown verify override(s): {sorted(unknown)}")
    lambda_sign = float(overrides.get("verify.lambda_sign", "1"))
    n_scenarios = int(overrides.get("verify.scenarios", "200"))
    results = verify.run_all(
        seed=args.seed, lambda_sign=lambda_sign, containment_scenarios=n_scenarios
    )
    for result in results:
        print(result.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_demo(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = True

    full = demos.interior_obstacle_scenario(baseline=False)
    base = demos.interior_obstacle_scenario(baseline=True)
    (out_dir / "interior_full.scn").write_text(format_scenario(full))
    (out_dir / "interior_baseline.scn").write_text(format_scenario(base))

    traj = demos.run_unmodulated(full)
    write_trajectory(traj, out_dir / "interior_original.csv")
    print(_summary("interior_original (no modulation)", traj))
    if traj.stats.min_gamma_o >= 1.0:
        ok = False
        print("  expected the unmodulated field to cut through the obstacle")

    traj = simulate(base)
    write_trajectory(traj, out_dir / "interior_baseline.csv")
    print(_summary("interior_baseline (obstacle-only)", traj))
    violated = traj.stats.max_gamma_w > 1.0
    print(f"  workspace violated: {violated} (max_gamma_w={traj.stats.max_gamma_w:.4f})")
    if not violated:
        ok = False

    traj = simulate(full)
    write_trajectory(traj, out_dir / "interior_full.csv")
    print(_summary("interior_full (full method)", traj))
    if not (
        traj.outcome is Outcome.REACHED_TARGET
        and traj.stats.max_gamma_w <= 1.0 + 1e-9
        and traj.stats.min_gamma_o >= 1.0 - 1e-9
    ):
        ok = False
        print("  expected containment + target reached")

    windings = {}
    for sign_pref in (SignPreference.ALONG, SignPreference.OPPOSITE):
        scenario = demos.crossing_obstacle_scenario(sign_pref)
        (out_dir / f"crossing_{sign_pref.value}.scn").write_text(
            format_scenario(scenario)
        )
        traj = simulate(scenario)
        write_trajectory(traj, out_dir / f"crossing_{sign_pref.value}.csv")
        line_pts = demos.intersection_samples(traj)
        wind = (
            demos.signed_winding(
                line_pts, scenario.obstacle.center, scenario.obstacle.center
            )
            if len(line_pts) > 1
            else 0.0
        )
        windings[sign_pref] = wind
        print(_summary(f"crossing_{sign_pref.value}", traj))
        print(f"  line samples={len(line_pts)} winding={wind:+.3f} rad")
        if traj.outcome is not Outcome.REACHED_TARGET or len(line_pts) < 2:
            ok = False
    if windings[SignPreference.ALONG] * windings[SignPreference.OPPOSITE] >= 0.0:
        ok = False
        print("  expected opposite circumnavigation windings")

    print("demo:", "ok" if ok else "FAILED EXPECTATIONS")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "verify": cmd_verify,
        "demo": cmd_demo,
    }[args.command]
    try:
        return handler(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AvoidanceError as exc:
        from .errors import ParseError, ValidationError

        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, (ParseError, ValidationError)):
            return EXIT_INPUT
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
