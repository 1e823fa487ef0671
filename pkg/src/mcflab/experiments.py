"""Batch experiments reproducing the quantitative stability claims."""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circle import ShiftState, ShrinkingCircle, extinction_time_from_area
from .energy import stability_rhs
from .errors import EmptyReportError
from .front_tracking import FTConfig, MarkerCurve, run_ft
from .geometry import circle_polygon, ellipse_polygon
from .graph_flow import FlowState, HeightField, SolverConfig, run, shift_rhs
from .profiles import CutoffProfiles
from .shifts import PicardConfig, ShiftTrajectory, picard_existence, shift_bounds_check
from .spectral import angular_grid

REGISTERED_EXPERIMENTS = ("mode-decay", "nonlinear-decay", "shift-scaling",
                          "gage-hamilton")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "out"

    def __post_init__(self):
        if self.name not in REGISTERED_EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; "
                             f"registered: {REGISTERED_EXPERIMENTS}")

    def get(self, key, default):
        return self.parameters.get(key, default)


@dataclass
class DecayReport:
    label: str
    snapshots: np.ndarray        # columns t, r_T, E, bound
    fitted_exponent: float
    confidence: float
    target: float
    passed: bool

    def rows(self):
        return self.snapshots


@dataclass
class ExperimentResult:
    name: str
    passed: bool
    summary: dict
    tables: dict                 # filename -> (header list, 2D array)
    diagnostics: dict = None
    wall_time: float = 0.0


def fit_decay_exponent(r_values, e_values, r0, window=(0.8, 0.2)):
    """Least-squares slope of log E against log r_T inside the fit window."""
    r = np.asarray(r_values, dtype=float)
    e = np.asarray(e_values, dtype=float)
    mask = (r <= window[0] * r0) & (r >= window[1] * r0) & (e > 0)
    if mask.sum() < 20:
        raise ValueError(f"only {int(mask.sum())} snapshots in the fit window; "
                         "need at least 20")
    x = np.log(r[mask])
    y = np.log(e[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    var = resid @ resid / dof / np.sum((x - x.mean()) ** 2)
    return float(slope), float(1.96 * np.sqrt(var))


def mode_decay_target(k, c_T, c_z, shifts_enabled):
    """Per-mode decay exponent of E against r_T from the mode ODEs."""
    if shifts_enabled:
        if k == 0:
            return 2.0 * c_T - 3.0
        if k == 1:
            return c_z - 1.0
    elif k <= 1:
        return -2.0 * (1.5 + 0.5 * k ** 2 - k ** 4) / (1.0 + k ** 2)
    return 2.0 * (k ** 4 - 1.5 - 0.5 * k ** 2) / (1.0 + k ** 2)


def _single_mode_state(k, amplitude, n, t_ext):
    phi = angular_grid(n)
    values = amplitude * (np.cos(k * phi) if k > 0 else np.ones(n))
    return FlowState(h=HeightField(values), shift=ShiftState(),
                     circle=ShrinkingCircle(t_ext))


def exp_mode_decay(spec):
    """Fit per-mode decay exponents of the linearized flow."""
    t_ext = spec.get("t_ext", 0.5)
    r0 = np.sqrt(2.0 * t_ext)
    modes = spec.get("modes", [0, 1, 2, 3])
    shifts = bool(spec.get("shifts", True))
    c_T = spec.get("c_T", 4.0)
    c_z = spec.get("c_z", 6.0)
    tolerance = spec.get("tolerance", 0.02)
    config = SolverConfig(n=int(spec.get("n", 256)), mode="linearized",
                          cfl=spec.get("cfl", 0.02),
                          r_stop=spec.get("r_stop", 0.15 * r0),
                          shift_enabled=shifts, c_T=c_T, c_z=c_z,
                          c_zeta=spec.get("c_zeta", 4.0))
    window = tuple(spec.get("window", (0.8, 0.2)))
    amplitude = spec.get("amplitude", 1e-3) * r0

    reports = {}
    rows = []
    term_tables = {}
    for k in modes:
        traj = run(_single_mode_state(k, amplitude, config.n, t_ext), config)
        r = traj.radii
        energy = np.array([s.energy.perturbative_e_int
                           + s.energy.perturbative_e_bulk
                           for s in traj.snapshots])
        slope, ci = fit_decay_exponent(r, energy, r0, window)
        target = mode_decay_target(k, c_T, c_z, shifts)
        passed = abs(slope - target) <= tolerance * abs(target)
        e0 = energy[0]
        bound = e0 * (r / r0) ** target
        snap = np.column_stack([traj.times, r, energy, bound])
        reports[k] = DecayReport(label=f"k={k}", snapshots=snap,
                                 fitted_exponent=slope, confidence=ci,
                                 target=target, passed=passed)
        rows.append(np.column_stack([np.full(len(r), k), snap]))
        term_tables[str(k)] = _final_term_table(traj, c_T, c_z, shifts)

    all_pass = all(rep.passed for rep in reports.values())
    summary = {
        "shifts_enabled": shifts,
        "modes": {str(k): {"fitted_alpha": reports[k].fitted_exponent,
                           "confidence": reports[k].confidence,
                           "target": reports[k].target,
                           "pass": reports[k].passed}
                  for k in reports},
        "tolerance": tolerance,
    }
    tables = {"trajectory.csv": (["k", "t", "r_T", "E", "bound"],
                                 np.vstack(rows))}
    return ExperimentResult(name=spec.name, passed=all_pass, summary=summary,
                            tables=tables,
                            diagnostics={"reports": reports,
                                         "term_tables": term_tables})


def _final_term_table(traj, c_T, c_z, shifts_enabled):
    state = traj.snapshots[-1].state
    h = state.h.values
    r_T = state.r_T
    zdot, tdot = (shift_rhs(h, r_T, c_T, c_z) if shifts_enabled
                  else (np.zeros(2), 0.0))
    r_lot, r_frozen, table = stability_rhs(h, r_T, zdot, tdot)
    table = {key: float(val) for key, val in table.items()}
    table["R_lot"] = r_lot
    table["R_lot_frozen"] = r_frozen
    return table


def multimode_profile(n, amplitude):
    """Fixed multimode initial height field with the given sup amplitude."""
    phi = angular_grid(n)
    prof = (0.3 + 0.5 * np.cos(phi) + 1.0 * np.cos(2 * phi)
            + 0.7 * np.sin(3 * phi) + 0.4 * np.cos(4 * phi))
    return amplitude * prof / np.abs(prof).max()


def exp_nonlinear_decay(spec):
    """Check E(t) <= slack * E0 (r_T/r0)^alpha for the nonlinear flow."""
    t_ext = spec.get("t_ext", 0.5)
    r0 = np.sqrt(2.0 * t_ext)
    alpha = spec.get("alpha", 4.5)
    slack = spec.get("slack", 1.05)
    amplitude = spec.get("amplitude", 0.02) * r0
    config = SolverConfig(n=int(spec.get("n", 256)), mode="nonlinear",
                          cfl=spec.get("cfl", 0.02),
                          r_stop=spec.get("r_stop", 0.1 * r0),
                          shift_enabled=True,
                          c_T=spec.get("c_T", 4.0), c_z=spec.get("c_z", 6.0),
                          c_zeta=spec.get("c_zeta", 4.0))
    state = FlowState(h=HeightField(multimode_profile(config.n, amplitude)),
                      shift=ShiftState(), circle=ShrinkingCircle(t_ext))
    traj = run(state, config)

    r = traj.radii
    energy = np.array([s.energy.e_total for s in traj.snapshots])
    e0 = energy[0]
    bound = slack * e0 * (r / r0) ** alpha
    decay_ok = bool(np.all(energy <= bound)) and traj.status == "reached_r_stop"

    z_hist = np.array([s.state.shift.z for s in traj.snapshots])
    dil_hist = np.array([s.state.shift.time_dilation for s in traj.snapshots])
    st = ShiftTrajectory(times=traj.times, z=z_hist, time_dilation=dil_hist,
                         status=traj.status, horizon=traj.times[-1],
                         extinction_time=t_ext)
    bounds_ok, margins = shift_bounds_check(st, r0, t_ext, e0)

    slope, ci = fit_decay_exponent(r, energy, r0, tuple(spec.get("window", (0.8, 0.2))))
    report = DecayReport(label="nonlinear", fitted_exponent=slope, confidence=ci,
                         snapshots=np.column_stack([traj.times, r, energy, bound]),
                         target=alpha, passed=decay_ok)
    passed = decay_ok and bounds_ok
    summary = {
        "alpha": alpha, "slack": slack, "amplitude": amplitude,
        "E0": float(e0), "fitted_alpha": slope, "confidence": ci,
        "decay_pass": decay_ok, "status": traj.status,
        "max_ratio": float(np.max(energy / np.maximum(bound, 1e-300))),
        "shift_bounds_pass": bool(bounds_ok),
        "shift_margins": {key: float(val) for key, val in margins.items()},
        "sqrt_E0_over_r0": float(np.sqrt(e0 / r0)),
    }
    tables = {"trajectory.csv": (["t", "r_T", "E", "bound"], report.snapshots)}
    term_table = _final_term_table(traj, config.c_T, config.c_z, True)
    return ExperimentResult(name=spec.name, passed=passed, summary=summary,
                            tables=tables,
                            diagnostics={"report": report,
                                         "term_tables": {"final": term_table}})


def _dilated_family(delta, t_ext, markers):
    weak_ext = (1.0 + np.sqrt(delta)) ** 2 * t_ext

    def weak(t):
        return circle_polygon((0.0, 0.0), np.sqrt(2.0 * (weak_ext - t)), markers)

    horizon = min(1.9 * t_ext, 0.999 * weak_ext)
    return weak, horizon


def _translated_family(delta, t_ext, markers):
    offset = np.sqrt(delta) * np.sqrt(2.0 * t_ext)

    def weak(t):
        return circle_polygon((offset, 0.0), np.sqrt(2.0 * (t_ext - t)), markers)

    return weak, 0.98 * t_ext


def exp_shift_scaling(spec):
    """Log-log slopes of the sup shifts against the perturbation size delta."""
    t_ext = spec.get("t_ext", 0.5)
    r0 = np.sqrt(2.0 * t_ext)
    deltas = np.asarray(spec.get("deltas", [1e-5, 1e-4, 1e-3, 1e-2]), dtype=float)
    families = spec.get("families", ["dilated", "translated"])
    slope_tol = spec.get("slope_tolerance", 0.05)
    profiles = CutoffProfiles(c_zeta=spec.get("c_zeta", 1.0))
    cfg = PicardConfig(truncation_k=int(spec.get("truncation_k", 8)),
                       fixed_point_tol=spec.get("fixed_point_tol", 1e-7),
                       max_iters=int(spec.get("max_iters", 200)),
                       mesh_nodes=int(spec.get("mesh_nodes", 288)),
                       rays=int(spec.get("rays", 64)))
    markers = int(spec.get("weak_markers", 128))
    sc = ShrinkingCircle(t_ext)

    summary = {"deltas": list(map(float, deltas)), "families": {}}
    rows = []
    all_pass = True
    for family in families:
        metrics = []
        for delta in deltas:
            if delta == 0.0:
                metrics.append(0.0)
                continue
            if family == "dilated":
                weak, horizon = _dilated_family(delta, t_ext, markers)
            elif family == "translated":
                weak, horizon = _translated_family(delta, t_ext, markers)
            else:
                raise ValueError(f"unknown family {family!r}")
            st = picard_existence(weak, sc, PicardConfig(
                truncation_k=cfg.truncation_k, fixed_point_tol=cfg.fixed_point_tol,
                max_iters=cfg.max_iters, mesh_nodes=cfg.mesh_nodes,
                rays=cfg.rays, horizon=horizon), profiles)
            if family == "dilated":
                metric = float(np.abs(st.time_dilation).max()) / t_ext
            else:
                metric = float(np.abs(st.z).max()) / r0
            metrics.append(metric)
            rows.append([0.0 if family == "dilated" else 1.0, delta, metric])
        pos = np.asarray(metrics) > 0
        slope = float(np.polyfit(np.log(deltas[pos]), np.log(np.asarray(metrics)[pos]), 1)[0])
        passed = abs(slope - 0.5) <= slope_tol
        all_pass = all_pass and passed
        summary["families"][family] = {
            "metrics": list(map(float, metrics)),
            "slope": slope,
            "pass": passed,
        }
    summary["slope_tolerance"] = slope_tol
    tables = {"trajectory.csv": (["family_id", "delta", "sup_shift"],
                                 np.asarray(rows))}
    return ExperimentResult(name=spec.name, passed=all_pass, summary=summary,
                            tables=tables)


def exp_gage_hamilton(spec):
    """Front-tracking ellipse run with circle-closeness onset times."""
    area = spec.get("area", np.pi)
    aspect = spec.get("aspect", 2.0)
    n = int(spec.get("n", 512))
    thresholds = spec.get("thresholds", [0.5, 0.2, 0.1])
    a = np.sqrt(aspect * area / np.pi)
    b = a / aspect
    config = FTConfig(n=n, cfl=spec.get("cfl", 0.4),
                      resample_every=int(spec.get("resample_every", 50)),
                      stop_area=spec.get("stop_area_frac", 0.01) * area,
                      snapshots=int(spec.get("snapshots", 80)))
    result = run_ft(MarkerCurve(ellipse_polygon(a, b, n)), config)

    t_expected = extinction_time_from_area(area)
    est = result.extinction_estimate
    ext_ok = abs(est - t_expected) <= 0.02 * t_expected

    times = np.array([s.t for s in result.snapshots])
    dev_max = np.array([s.deviation.max() for s in result.snapshots])
    onsets = {}
    for thr in thresholds:
        below = dev_max <= thr
        onset = np.nan
        for i in range(len(times)):
            if below[i:].all():
                onset = float(times[i])
                break
        onsets[str(thr)] = onset
    onset_vals = [onsets[str(t)] for t in sorted(thresholds, reverse=True)]
    monotone = all(not np.isnan(v) for v in onset_vals) and \
        all(x <= y + 1e-12 for x, y in zip(onset_vals, onset_vals[1:]))

    passed = ext_ok and monotone
    rows = np.column_stack([
        times,
        np.array([s.area for s in result.snapshots]),
        np.array([s.length for s in result.snapshots]),
        np.array([s.deviation.length_dev for s in result.snapshots]),
        np.array([s.deviation.normal_dev for s in result.snapshots]),
        np.array([s.deviation.curvature_dev for s in result.snapshots]),
        np.array([s.deviation.curvature_grad_dev for s in result.snapshots]),
    ])
    summary = {
        "aspect": aspect, "area": float(area),
        "extinction_expected": float(t_expected),
        "extinction_estimate": float(est),
        "extinction_pass": bool(ext_ok),
        "onset_times": onsets,
        "onsets_monotone": bool(monotone),
        "convexity_onset": float(result.convexity_onset),
    }
    tables = {"trajectory.csv": (
        ["t", "area", "length", "length_dev", "normal_dev", "curvature_dev",
         "curvature_grad_dev"], rows)}
    count = len(result.snapshots)
    for tag, idx in (("initial", 0), ("middle", count // 2), ("final", count - 1)):
        tables[f"curve_{tag}.csv"] = (
            ["x", "y"], result.snapshots[idx].markers.curve.points)
    return ExperimentResult(name=spec.name, passed=passed, summary=summary,
                            tables=tables, diagnostics={"result": result})


_RUNNERS = {
    "mode-decay": exp_mode_decay,
    "nonlinear-decay": exp_nonlinear_decay,
    "shift-scaling": exp_shift_scaling,
    "gage-hamilton": exp_gage_hamilton,
}


def run_experiment(spec):
    started = time.perf_counter()
    result = _RUNNERS[spec.name](spec)
    result.wall_time = time.perf_counter() - started
    return result


def emit_report(results, output_dir, formats=("csv", "json"),
                diagnostics=False, render_plots=True):
    """Write deterministic per-experiment reports (and figures) to disk.

    Layout: <output_dir>/<experiment>/{trajectory.csv, summary.json} with
    matplotlib figures rendered next to them unless disabled.
    """
    if not results:
        raise EmptyReportError("no experiment results to report")
    if isinstance(results, ExperimentResult):
        results = [results]
    unknown = set(formats) - {"csv", "json"}
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    written = []
    for result in results:
        exp_dir = Path(output_dir) / result.name
        exp_dir.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            for fname, (header, rows) in result.tables.items():
                path = exp_dir / fname
                np.savetxt(path, np.atleast_2d(rows), delimiter=",",
                           header=",".join(header), comments="", fmt="%.17g")
                written.append(str(path))
        if "json" in formats:
            path = exp_dir / "summary.json"
            payload = {"experiment": result.name, "pass": bool(result.passed),
                       "wall_time_s": result.wall_time}
            payload.update(result.summary)
            with open(path, "w") as f:
                json.dump(payload, f, indent=2, sort_keys=True, default=float)
            written.append(str(path))
        if diagnostics and result.diagnostics is not None:
            diag_path = exp_dir / "diagnostics.json"
            with open(diag_path, "w") as f:
                json.dump(_diagnostics_payload(result), f, indent=2,
                          sort_keys=True, default=float)
            written.append(str(diag_path))
        if render_plots:
            from . import plots
            written.extend(plots.render(result, exp_dir))
    return written


def _diagnostics_payload(result):
    """JSON-ready diagnostics: stability term tables for decay experiments."""
    payload = {"experiment": result.name}
    diag = result.diagnostics or {}
    if "term_tables" in diag:
        payload["term_tables"] = diag["term_tables"]
    reports = diag.get("reports")
    if diag.get("report") is not None:
        reports = {"nonlinear": diag["report"]}
    if reports:
        payload["decay_reports"] = {
            str(k): {"fitted": rep.fitted_exponent, "target": rep.target,
                     "confidence": rep.confidence, "pass": rep.passed}
            for k, rep in reports.items()}
    return payload
