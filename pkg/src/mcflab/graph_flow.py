"""Height-field evolution over the shifted shrinking circle.

The weak interface is the polar graph rho(phi) = r_T - h(phi) about the
moving center z(t).  The stiff part (d^2/dphi^2 + 1)/r_T^2 is integrated
with an exact Fourier multiplier (the integral of 1/r_T^2 over the step is
closed-form for linear-in-time r_T^2); the remainder and the shift ODE use
one explicit midpoint stage, coupled within the same stage.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .circle import ShiftState, ShiftedInterface, ShrinkingCircle
from .energy import (EnergyBreakdown, e_bulk, e_int, graph_dissipation,
                     mode_spectrum, perturbative_energy)
from .errors import RegimeError, StepRejectedError
from .geometry import ClosedCurve
from .profiles import CutoffProfiles
from .spectral import angular_grid, dphi, dphi2

_MAX_STABLE_FRACTION = 0.45   # dt may consume at most this fraction of r_T^2


@dataclass(frozen=True)
class HeightField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = len(v)
        if n < 32 or (n & (n - 1)) != 0:
            raise ValueError(f"sample count must be a power of two >= 32, got {n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("height samples must be finite")
        object.__setattr__(self, "values", v)
        self.values.setflags(write=False)

    @property
    def n(self):
        return len(self.values)

    @property
    def phi(self):
        return angular_grid(self.n)


@dataclass(frozen=True)
class FlowState:
    h: HeightField
    shift: ShiftState
    circle: ShrinkingCircle

    @property
    def r_T(self):
        return self.interface.r_T

    @property
    def interface(self):
        return ShiftedInterface(self.circle, self.shift)

    @property
    def t(self):
        return self.shift.t

    def arc_derivative(self):
        return dphi(self.h.values) / self.r_T

    def in_graph_regime(self):
        r_T = 2.0 * (self.circle.extinction_time - self.shift.T)
        if r_T <= 0:
            return False
        r_T = np.sqrt(r_T)
        h = self.h.values
        return bool(np.max(np.abs(h)) < 0.5 * r_T
                    and np.max(np.abs(dphi(h))) / r_T < 1.0)

    def weak_curve(self):
        """The height field as a marker polygon (positively oriented)."""
        phi = self.h.phi
        radii = self.r_T - self.h.values
        pts = self.interface.center + radii[:, None] * np.column_stack(
            [np.cos(phi), np.sin(phi)])
        return ClosedCurve(pts)


@dataclass(frozen=True)
class SolverConfig:
    n: int = 256
    mode: str = "linearized"           # or "nonlinear"
    cfl: float = 0.2
    r_stop: float = 0.05
    shift_enabled: bool = True
    c_T: float = 4.0
    c_z: float = 6.0
    c_zeta: float = 4.0
    snapshot_every: int = 1
    diagnostics: bool = True

    def __post_init__(self):
        if self.r_stop <= 0:
            raise ValueError("r_stop must be positive")
        if self.c_T <= 0 or self.c_z <= 0:
            raise ValueError("shift constants must be positive")
        if self.mode not in ("linearized", "nonlinear"):
            raise ValueError(f"unknown solver mode {self.mode!r}")


@dataclass(frozen=True)
class Snapshot:
    t: float
    state: FlowState
    energy: EnergyBreakdown
    spectrum: object


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    status: str = "running"            # reached_r_stop | regime_exit
    config: SolverConfig = None
    wall_time: float = 0.0

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])

    @property
    def radii(self):
        return np.array([s.state.r_T for s in self.snapshots])

    def to_csv(self, path, k_max=8):
        rows = []
        for s in self.snapshots:
            spec = s.spectrum
            rows.append([s.t, s.state.r_T, s.state.shift.z[0], s.state.shift.z[1],
                         s.state.shift.time_dilation, s.energy.e_int,
                         s.energy.e_bulk, s.energy.e_total, s.energy.dissipation]
                        + list(spec.a[:k_max + 1]) + list(spec.b[1:k_max + 1]))
        header = ["t", "r_T", "z_x", "z_y", "time_dilation", "e_int", "e_bulk",
                  "e_total", "dissipation"]
        header += [f"a{k}" for k in range(k_max + 1)]
        header += [f"b{k}" for k in range(1, k_max + 1)]
        np.savetxt(path, np.asarray(rows), delimiter=",",
                   header=",".join(header), comments="", fmt="%.17g")

    def to_json(self, path):
        meta = {
            "status": self.status,
            "snapshots": len(self.snapshots),
            "wall_time_s": self.wall_time,
            "extinction_time": self.snapshots[0].state.circle.extinction_time
            if self.snapshots else None,
            "config": asdict(self.config) if self.config else None,
        }
        if self.snapshots:
            # perturbative-regime margins (diagnostics, not gates): the
            # sharp smallness constants normalize sup|h| by r_T/(16 c_zeta)
            # and sup|h'| by 1
            state = self.snapshots[-1].state
            c_zeta = self.config.c_zeta if self.config else 4.0
            sup_h = float(np.abs(state.h.values).max())
            sup_hp = float(np.abs(state.arc_derivative()).max())
            meta["regime_margins"] = {
                "sup_h_over_band": sup_h * 16.0 * c_zeta / state.r_T,
                "sup_h_prime": sup_hp,
            }
        with open(path, "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)


def shift_rhs(values, r_T, c_T=4.0, c_z=6.0):
    """Shift ODE right-hand side from the angular means of the height field."""
    if r_T <= 0:
        raise ValueError("r_T must be positive")
    h = np.asarray(values, dtype=float)
    phi = angular_grid(len(h))
    nbar = -np.column_stack([np.cos(phi), np.sin(phi)])
    tdot = c_T / r_T * float(h.mean())
    zdot = c_z / r_T ** 2 * (h[:, None] * nbar).mean(axis=0)
    return zdot, tdot


def _require_regime(state):
    if not state.in_graph_regime():
        raise RegimeError(
            f"graph regime violated at t={state.t:.6g} (r_T context)")


def linearized_rhs(state, shift_enabled=True, c_T=4.0, c_z=6.0):
    """Linearized evolution rate of the height field."""
    _require_regime(state)
    h = state.h.values
    r_T = state.r_T
    rate = (dphi2(h) + h) / r_T ** 2
    if shift_enabled:
        zdot, tdot = shift_rhs(h, r_T, c_T, c_z)
        phi = state.h.phi
        nbar = -np.column_stack([np.cos(phi), np.sin(phi)])
        rate = rate - tdot / r_T - nbar @ zdot
    return rate


def nonlinear_rhs(state, shift_enabled=True, c_T=4.0, c_z=6.0):
    """Exact polar curve-shortening rate of the height field."""
    _require_regime(state)
    h = state.h.values
    r_T = state.r_T
    u = r_T - h
    if np.min(u) <= 1e-9 * r_T:
        raise RegimeError("graph touches the moving center")
    zdot, tdot = (shift_rhs(h, r_T, c_T, c_z) if shift_enabled
                  else (np.zeros(2), 0.0))
    return _nonlinear_rate(h, r_T, zdot, tdot)


def _nonlinear_rate(h, r_T, zdot, tdot):
    n = len(h)
    phi = angular_grid(n)
    u = r_T - h
    up = -dphi(h)
    upp = -dphi2(h)
    q_sq = u * u + up * up
    kappa = (u * u + 2.0 * up * up - u * upp) / q_sq ** 1.5
    nbar_dot = -(np.cos(phi) * zdot[0] + np.sin(phi) * zdot[1])
    tau_dot = -np.sin(phi) * zdot[0] + np.cos(phi) * zdot[1]
    return (kappa * np.sqrt(q_sq) / u - (1.0 + tdot) / r_T - nbar_dot
            + (dphi(h) / u) * tau_dot)


def _full_rate(values, r_T, zdot, tdot, mode):
    """RHS for given shift rates."""
    h = values
    if mode == "nonlinear":
        if np.max(h) >= r_T * (1.0 - 1e-9):
            raise RegimeError("graph touches the moving center")
        return _nonlinear_rate(h, r_T, zdot, tdot)
    n = len(h)
    phi = angular_grid(n)
    nbar_dot = -(np.cos(phi) * zdot[0] + np.sin(phi) * zdot[1])
    return (dphi2(h) + h) / r_T ** 2 - tdot / r_T - nbar_dot


def _exp_multiplier(r_a, r_b, dt, lam):
    """exp(lam * int dt / r^2) with r^2 linear in time between the endpoints."""
    ra2, rb2 = r_a * r_a, r_b * r_b
    if abs(ra2 - rb2) < 1e-300:
        integral = dt / ra2
    else:
        integral = dt * np.log(ra2 / rb2) / (ra2 - rb2)
    return np.exp(lam * integral)


def step(state, dt, config):
    """One coupled exponential-midpoint step of height field and shifts."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    _require_regime(state)
    r_T = state.r_T
    bound = min(config.cfl, _MAX_STABLE_FRACTION) * r_T ** 2
    if dt > bound * (1.0 + 1e-12):
        raise StepRejectedError(
            f"dt={dt:.3g} exceeds stability bound {bound:.3g}",
            suggested_dt=bound)

    h = state.h.values
    n = len(h)
    t_ext = state.circle.extinction_time
    k = np.fft.rfftfreq(n, d=1.0 / n)
    lam = 1.0 - k ** 2
    shift_args = (config.c_T, config.c_z)

    def rates(values, r_now):
        if config.shift_enabled:
            zd, td = shift_rhs(values, r_now, *shift_args)
        else:
            zd, td = np.zeros(2), 0.0
        return _full_rate(values, r_now, zd, td, config.mode), zd, td

    def radius(t, dilation):
        r_sq = 2.0 * (t_ext - t - dilation)
        if r_sq <= 0:
            raise StepRejectedError(
                "step would pass the extinction time", suggested_dt=0.5 * dt)
        return np.sqrt(r_sq)

    t0, z0, dil0 = state.t, state.shift.z, state.shift.time_dilation
    f0, zd0, td0 = rates(h, r_T)
    n0 = f0 - np.fft.irfft(lam * np.fft.rfft(h), n) / r_T ** 2

    t_mid = t0 + 0.5 * dt
    z_mid = z0 + 0.5 * dt * zd0
    dil_mid = dil0 + 0.5 * dt * td0
    r_mid = radius(t_mid, dil_mid)
    e_half = _exp_multiplier(r_T, r_mid, 0.5 * dt, lam)
    h_mid = np.fft.irfft(e_half * (np.fft.rfft(h) + 0.5 * dt * np.fft.rfft(n0)), n)

    f_mid, zd_mid, td_mid = rates(h_mid, r_mid)
    n_mid = f_mid - np.fft.irfft(lam * np.fft.rfft(h_mid), n) / r_mid ** 2

    t1 = t0 + dt
    z1 = z0 + dt * zd_mid
    dil1 = dil0 + dt * td_mid
    r1 = radius(t1, dil1)
    e_full = _exp_multiplier(r_T, r1, dt, lam)
    e_second = _exp_multiplier(r_mid, r1, 0.5 * dt, lam)
    h1 = np.fft.irfft(e_full * np.fft.rfft(h) + dt * e_second * np.fft.rfft(n_mid), n)

    return FlowState(h=HeightField(h1),
                     shift=ShiftState(z=z1, time_dilation=dil1, t=t1),
                     circle=state.circle)


def _diagnostics(state, profiles, k_max=8):
    h = state.h.values
    r_T = state.r_T
    pert_bulk, pert_int = perturbative_energy(h, r_T)
    diss = graph_dissipation(h, r_T)
    weak = state.weak_curve()
    full_int = e_int(weak, state.interface, profiles)
    full_bulk = e_bulk(weak, state.interface, profiles)
    spec = mode_spectrum(h, min(k_max, len(h) // 2 - 1))
    return EnergyBreakdown(e_int=full_int, e_bulk=full_bulk, dissipation=diss,
                           perturbative_e_int=pert_int,
                           perturbative_e_bulk=pert_bulk), spec


def run(initial, config):
    """Advance the flow until r_T <= r_stop or the graph regime fails."""
    started = time.perf_counter()
    traj = Trajectory(config=config)
    profiles = CutoffProfiles(c_zeta=config.c_zeta)

    def record(state):
        if config.diagnostics:
            energy, spec = _diagnostics(state, profiles)
        else:
            pert_bulk, pert_int = perturbative_energy(state.h.values, state.r_T)
            energy = EnergyBreakdown(e_int=pert_int, e_bulk=pert_bulk,
                                     dissipation=np.nan,
                                     perturbative_e_int=pert_int,
                                     perturbative_e_bulk=pert_bulk)
            spec = mode_spectrum(state.h.values, min(8, state.h.n // 2 - 1))
        traj.snapshots.append(Snapshot(t=state.t, state=state,
                                       energy=energy, spectrum=spec))

    state = initial
    if not state.in_graph_regime():
        traj.status = "regime_exit"
        traj.wall_time = time.perf_counter() - started
        return traj
    record(state)

    steps = 0
    while state.r_T > config.r_stop:
        dt = min(config.cfl, _MAX_STABLE_FRACTION) * state.r_T ** 2
        try:
            state = step(state, dt, config)
        except StepRejectedError as err:
            dt = err.suggested_dt
            state = step(state, dt, config)
        except RegimeError:
            traj.status = "regime_exit"
            traj.wall_time = time.perf_counter() - started
            return traj
        steps += 1
        if not state.in_graph_regime():
            record(state)
            traj.status = "regime_exit"
            traj.wall_time = time.perf_counter() - started
            return traj
        if steps % config.snapshot_every == 0 or state.r_T <= config.r_stop:
            record(state)
    traj.status = "reached_r_stop"
    traj.wall_time = time.perf_counter() - started
    return traj
