"""Space-time shift construction for general weak curves.

The shift ODE is driven by averages of the interface error heights; its
solution is produced by damped Picard iteration on the integral fixed-point
form, with the time-dilation truncated at a ladder of ceilings below the
extinction time (the trajectory is only kept on the span where the
truncation is inactive).
"""

from dataclasses import dataclass, field

import numpy as np

from .circle import ShiftState, ShiftedInterface
from .energy import error_heights
from .errors import ConvergenceError
from .spectral import angular_grid


@dataclass(frozen=True)
class PicardConfig:
    truncation_k: int = 8
    fixed_point_tol: float = 1e-8
    max_iters: int = 200
    mesh_nodes: int = 2048
    damping: float = 0.5
    rays: int = 96
    horizon: float = None

    def __post_init__(self):
        if self.truncation_k < 1 or self.max_iters < 1 or self.fixed_point_tol <= 0:
            raise ValueError("picard configuration values must be positive")


@dataclass
class ShiftTrajectory:
    times: np.ndarray
    z: np.ndarray
    time_dilation: np.ndarray
    status: str
    horizon: float
    level_horizons: list = field(default_factory=list)
    rates: np.ndarray = None
    extinction_time: float = np.nan

    @property
    def T(self):
        return self.times + self.time_dilation

    def to_csv(self, path):
        r_T = np.sqrt(2.0 * (self.extinction_time - self.T))
        rows = np.column_stack([self.times, self.z, self.time_dilation, r_T])
        np.savetxt(path, rows, delimiter=",",
                   header="t,z_x,z_y,time_dilation,r_T", comments="", fmt="%.17g")


def shift_rhs_general(weak, si, profiles, m=96):
    """Shift ODE right-hand side from error-height averages on the circle."""
    heights = error_heights(weak, si, profiles, m)
    r_T = si.r_T
    phi = heights.phi
    nbar = -np.column_stack([np.cos(phi), np.sin(phi)])
    zdot = 6.0 / r_T ** 2 * (heights.rho[:, None] * nbar).mean(axis=0)
    tdot = 4.0 / r_T * float(heights.rho.mean())
    return zdot, tdot


def _truncation_levels(k_max):
    if k_max == 1:
        return [1]
    levels = []
    k = 2
    while k <= k_max:
        levels.append(k)
        k *= 2
    if levels[-1] != k_max:
        levels.append(k_max)
    return levels


def picard_existence(weak_trajectory, sc, cfg, profiles):
    """Solve the truncated shift fixed-point problems and join the horizons.

    weak_trajectory maps t to a ClosedCurve; it must be defined on the whole
    mesh [0, horizon].  For each truncation level the damped Picard map

        Y <- (1 - damping) Y + damping * int_0^t F_k(Y(s), s) ds

    is iterated to the fixed-point tolerance; the result is kept up to the
    time its dilation reaches the truncation ceiling.
    """
    t_ext = sc.extinction_time
    levels = _truncation_levels(cfg.truncation_k)
    horizon = cfg.horizon
    if horizon is None:
        horizon = (1.0 - 1.0 / (2.0 * levels[-1])) * t_ext
    ts = np.linspace(0.0, horizon, cfg.mesh_nodes)
    polys = [weak_trajectory(t) for t in ts]
    dt_nodes = np.diff(ts)

    y = np.zeros((cfg.mesh_nodes, 3))          # z_x, z_y, time dilation
    scale = sc.r0
    level_horizons = []
    rates = np.zeros_like(y)
    for k in levels:
        ceiling = (1.0 - 1.0 / k) * t_ext
        res_prev = np.inf
        grew = 0
        for _ in range(cfg.max_iters):
            for i, t in enumerate(ts):
                t_shift = min(t + y[i, 2], ceiling)
                si = ShiftedInterface(sc, ShiftState(
                    z=y[i, :2], time_dilation=t_shift - t, t=t))
                zdot, tdot = shift_rhs_general(polys[i], si, profiles, cfg.rays)
                rates[i, :2] = zdot
                rates[i, 2] = tdot
            integral = np.zeros_like(y)
            integral[1:] = np.cumsum(
                0.5 * (rates[1:] + rates[:-1]) * dt_nodes[:, None], axis=0)
            y_new = (1.0 - cfg.damping) * y + cfg.damping * integral
            residual = float(np.abs(y_new - y).max())
            y = y_new
            if residual < cfg.fixed_point_tol * scale:
                break
            grew = grew + 1 if residual > res_prev else 0
            res_prev = residual
            if grew >= 10:
                raise ConvergenceError(
                    f"picard residual growing at truncation level {k}",
                    residual=residual)
        else:
            raise ConvergenceError(
                f"picard did not reach tol at level {k}", residual=residual)
        reached = np.nonzero(ts + y[:, 2] >= ceiling)[0]
        level_horizons.append(float(ts[reached[0]]) if len(reached) else float(horizon))

    t_k = level_horizons[-1]
    keep = ts < t_k
    status = "extinct" if t_k < horizon else "reached_horizon"
    return ShiftTrajectory(times=ts[keep], z=y[keep, :2],
                           time_dilation=y[keep, 2], status=status,
                           horizon=t_k, level_horizons=level_horizons,
                           rates=rates[keep], extinction_time=t_ext)


def shift_bounds_check(st, r0, t_ext, e0):
    """A-posteriori check of the square-root shift bounds."""
    if e0 < 0:
        raise ValueError("initial energy must be nonnegative")
    budget = np.sqrt(e0 / r0)
    z_sup = float(np.abs(st.z).max() if len(st.z) else 0.0)
    t_sup = float(np.abs(st.time_dilation).max() if len(st.time_dilation) else 0.0)
    margins = {
        "translation": budget - z_sup / r0,
        "time_dilation": budget - t_sup / t_ext,
    }
    passed = margins["translation"] >= 0.0 and margins["time_dilation"] >= 0.0
    return passed, margins
