"""Matplotlib figure rendering for experiment reports."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render(result, out_dir):
    """Render the figures appropriate to the experiment; returns file paths."""
    fn = {
        "mode-decay": _render_mode_decay,
        "nonlinear-decay": _render_nonlinear,
        "shift-scaling": _render_scaling,
        "gage-hamilton": _render_gage,
    }.get(result.name)
    if fn is None:
        return []
    return fn(result, out_dir)


def _save(fig, path):
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def _render_mode_decay(result, out_dir):
    header, rows = result.tables["trajectory.csv"]
    rows = np.atleast_2d(rows)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for k in sorted(set(rows[:, 0].astype(int))):
        sel = rows[:, 0].astype(int) == k
        info = result.summary["modes"][str(k)]
        ax.loglog(rows[sel, 2], rows[sel, 3],
                  label=f"k={k}: fit {info['fitted_alpha']:.3f} "
                        f"(target {info['target']:g})")
        ax.loglog(rows[sel, 2], rows[sel, 4], "k--", lw=0.7, alpha=0.5)
    ax.set_xlabel(r"$r_T$")
    ax.set_ylabel("E")
    ax.legend(fontsize=8)
    ax.set_title("Per-mode energy decay vs radius")
    return [_save(fig, out_dir / "decay.png")]


def _render_nonlinear(result, out_dir):
    header, rows = result.tables["trajectory.csv"]
    rows = np.atleast_2d(rows)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.loglog(rows[:, 1], rows[:, 2], label="E(t)")
    ax.loglog(rows[:, 1], rows[:, 3], "k--",
              label=f"{result.summary['slack']:g} E0 (r/r0)^"
                    f"{result.summary['alpha']:g}")
    ax.set_xlabel(r"$r_T$")
    ax.set_ylabel("E")
    ax.legend(fontsize=8)
    ax.set_title("Nonlinear relative-energy decay")
    return [_save(fig, out_dir / "decay.png")]


def _render_scaling(result, out_dir):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    deltas = np.asarray(result.summary["deltas"])
    for family, info in result.summary["families"].items():
        metrics = np.asarray(info["metrics"])
        ax.loglog(deltas, metrics, "o-",
                  label=f"{family}: slope {info['slope']:.3f}")
    ax.loglog(deltas, np.sqrt(deltas), "k--", lw=0.8, label=r"$\sqrt{\delta}$")
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel("sup shift (normalized)")
    ax.legend(fontsize=8)
    ax.set_title("Shift scaling against perturbation size")
    return [_save(fig, out_dir / "scaling.png")]


def _render_gage(result, out_dir):
    header, rows = result.tables["trajectory.csv"]
    rows = np.atleast_2d(rows)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    labels = header[3:]
    for col, label in enumerate(labels, start=3):
        ax.semilogy(rows[:, 0], np.maximum(rows[:, col], 1e-16), label=label)
    for thr, t0 in result.summary["onset_times"].items():
        if not (t0 is None or np.isnan(t0)):
            ax.axvline(t0, color="grey", lw=0.6, alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("deviation")
    ax.legend(fontsize=8)
    ax.set_title("Circle-closeness deviations along the flow")
    paths = [_save(fig, out_dir / "deviations.png")]

    diag = result.diagnostics or {}
    ft = diag.get("result")
    if ft is not None and ft.snapshots:
        fig, ax = plt.subplots(figsize=(4.6, 4.6))
        count = len(ft.snapshots)
        picks = sorted({0, count // 4, count // 2, 3 * count // 4, count - 1})
        for i in picks:
            pts = ft.snapshots[i].markers.curve.points
            closed = np.vstack([pts, pts[:1]])
            ax.plot(closed[:, 0], closed[:, 1], lw=0.9,
                    label=f"t={ft.snapshots[i].t:.3f}")
        ax.set_aspect("equal")
        ax.legend(fontsize=7)
        ax.set_title("Front-tracking snapshots")
        paths.append(_save(fig, out_dir / "fronts.png"))
    return paths


def render_trajectory(traj, out_dir):
    """Overview figure for a single simulated trajectory."""
    from pathlib import Path
    out_dir = Path(out_dir)
    t = traj.times
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    axes[0].plot(t, traj.radii)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel(r"$r_T$")
    e_tot = np.array([s.energy.e_total for s in traj.snapshots])
    axes[1].semilogy(t, np.maximum(e_tot, 1e-300))
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("E")
    amps = np.array([np.hypot(s.spectrum.a[:5], s.spectrum.b[:5])
                     for s in traj.snapshots])
    for k in range(amps.shape[1]):
        axes[2].semilogy(t, np.maximum(amps[:, k], 1e-300), label=f"k={k}")
    axes[2].set_xlabel("t")
    axes[2].set_ylabel("mode amplitude")
    axes[2].legend(fontsize=7)
    fig.suptitle(f"trajectory ({traj.status})")
    return [_save(fig, out_dir / "trajectory.png")]
