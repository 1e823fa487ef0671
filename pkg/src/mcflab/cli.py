"""Command-line entry points for simulations and batch experiments."""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np
import tomli

from .circle import ShiftState, ShrinkingCircle
from .experiments import (REGISTERED_EXPERIMENTS, ExperimentSpec, emit_report,
                          run_experiment)
from .graph_flow import FlowState, HeightField, SolverConfig, run
from .spectral import angular_grid

_COMMAND_TO_EXPERIMENT = {
    "verify-decay": "nonlinear-decay",
    "mode-analysis": "mode-decay",
    "shift-scaling": "shift-scaling",
    "gage-hamilton": "gage-hamilton",
}


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as f:
        return tomli.load(f)


def _build_initial(section, n, t_ext):
    phi = angular_grid(n)
    values = np.zeros(n)
    for key, amp in section.get("cos", {}).items():
        values += float(amp) * np.cos(int(key) * phi)
    for key, amp in section.get("sin", {}).items():
        values += float(amp) * np.sin(int(key) * phi)
    return FlowState(h=HeightField(values), shift=ShiftState(),
                     circle=ShrinkingCircle(t_ext))


def _cmd_simulate(args):
    config = _load_config(args.config)
    sim = config.get("simulate", {})
    t_ext = float(sim.get("t_ext", 0.5))
    r0 = float(np.sqrt(2.0 * t_ext))
    solver = SolverConfig(
        n=int(sim.get("n", 256)),
        mode=sim.get("mode", "nonlinear"),
        cfl=float(sim.get("cfl", 0.05)),
        r_stop=float(sim.get("r_stop", 0.05 * r0)),
        shift_enabled=bool(sim.get("shifts", True)),
        c_T=float(sim.get("c_t", 4.0)),
        c_z=float(sim.get("c_z", 6.0)),
        c_zeta=float(sim.get("c_zeta", 4.0)),
        snapshot_every=int(sim.get("snapshot_every", 1)),
    )
    state = _build_initial(sim.get("initial", {}), solver.n, t_ext)
    traj = run(state, solver)
    out = Path(args.out) / "simulate"
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    traj.to_json(out / "summary.json")
    if args.diagnostics and traj.snapshots:
        from .energy import stability_rhs
        from .graph_flow import shift_rhs
        state = traj.snapshots[-1].state
        zdot, tdot = (shift_rhs(state.h.values, state.r_T, solver.c_T, solver.c_z)
                      if solver.shift_enabled else (np.zeros(2), 0.0))
        r_lot, r_frozen, table = stability_rhs(state.h.values, state.r_T,
                                               zdot, tdot)
        table = {key: float(val) for key, val in table.items()}
        table.update({"R_lot": r_lot, "R_lot_frozen": r_frozen})
        with open(out / "diagnostics.json", "w") as f:
            json.dump({"term_table": table}, f, indent=2, sort_keys=True)
    if not args.no_plots:
        from . import plots
        plots.render_trajectory(traj, out)
    print(f"simulate: status={traj.status} snapshots={len(traj.snapshots)} "
          f"-> {out}")
    return 0 if traj.status == "reached_r_stop" else 1


def _run_named_experiment(name, args):
    config = _load_config(args.config)
    section = config.get("experiment", {})
    params = dict(section.get("parameters", {}))
    out_dir = args.out or section.get("output_dir", "out")
    spec = ExperimentSpec(name=name, parameters=params, output_dir=out_dir)
    result = run_experiment(spec)
    emit_report([result], out_dir, formats=("csv", "json"),
                diagnostics=args.diagnostics, render_plots=not args.no_plots)
    flag = "PASS" if result.passed else "FAIL"
    print(f"{name}: {flag} ({result.wall_time:.1f}s) -> {Path(out_dir) / name}")
    return 0 if result.passed else 1


def _sweep_variants(grid):
    keys = sorted(grid)
    for combo in product(*(grid[key] for key in keys)):
        yield dict(zip(keys, combo))


def _run_spec(spec_args):
    spec, diagnostics, render_plots = spec_args
    result = run_experiment(spec)
    emit_report([result], spec.output_dir, formats=("csv", "json"),
                diagnostics=diagnostics, render_plots=render_plots)
    return spec.output_dir, result.passed


def _cmd_sweep(args):
    config = _load_config(args.config)
    sweep = config.get("sweep", {})
    name = sweep.get("experiment")
    if name not in REGISTERED_EXPERIMENTS:
        print(f"sweep: unknown experiment {name!r}", file=sys.stderr)
        return 2
    base = dict(sweep.get("parameters", {}))
    grid = dict(sweep.get("grid", {}))
    out_root = Path(args.out or sweep.get("output_dir", "out"))
    jobs = []
    for i, variant in enumerate(_sweep_variants(grid)):
        params = dict(base)
        params.update(variant)
        spec = ExperimentSpec(name=name, parameters=params,
                              output_dir=str(out_root / f"run-{i:03d}"))
        jobs.append((spec, args.diagnostics, not args.no_plots))
    if not jobs:
        jobs = [(ExperimentSpec(name=name, parameters=base,
                                output_dir=str(out_root / "run-000")),
                 args.diagnostics, not args.no_plots)]
    all_pass = True
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_run_spec, jobs))
    else:
        outcomes = [_run_spec(job) for job in jobs]
    manifest = []
    for out_dir, passed in outcomes:
        all_pass = all_pass and passed
        manifest.append({"output_dir": out_dir, "pass": passed})
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "sweep.json", "w") as f:
        json.dump({"experiment": name, "runs": manifest,
                   "pass": all_pass}, f, indent=2, sort_keys=True)
    print(f"sweep: {len(jobs)} runs, {'PASS' if all_pass else 'FAIL'}")
    return 0 if all_pass else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcflab",
        description="Curve-shortening stability laboratory: simulations and "
                    "quantitative decay experiments near circular extinction.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=False):
        p.add_argument("config", nargs=None if config_required else "?",
                       default=None, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--diagnostics", action="store_true",
                       help="emit stability term tables as JSON")
        p.add_argument("--no-plots", action="store_true",
                       help="skip matplotlib figure rendering")

    sim = sub.add_parser("simulate", help="run one trajectory from a config")
    add_common(sim, config_required=True)
    sim.set_defaults(func=_cmd_simulate)
    sim.set_defaults(out="out")

    for command, experiment in _COMMAND_TO_EXPERIMENT.items():
        p = sub.add_parser(command, help=f"run the {experiment} experiment")
        add_common(p)
        p.set_defaults(func=lambda a, name=experiment: _run_named_experiment(name, a))

    sweep = sub.add_parser("sweep", help="grid of experiments from a config")
    add_common(sweep, config_required=True)
    sweep.add_argument("--workers", type=int, default=4,
                       help="parallel worker processes")
    sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None:
        args.out = None if args.command != "simulate" else "out"
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
