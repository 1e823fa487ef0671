"""Independent oracles for expected values; none share code with mcflab."""

import numpy as np
from matplotlib.path import Path as MplPath
from scipy.integrate import solve_ivp


def ellipse_curvature(a, b, t):
    """Exact curvature of (a cos t, b sin t)."""
    return a * b / (a ** 2 * np.sin(t) ** 2 + b ** 2 * np.cos(t) ** 2) ** 1.5


def polar_curvature(rho, rho_p, rho_pp):
    """Exact curvature of a polar graph r(phi) (convex-positive convention)."""
    return (rho ** 2 + 2 * rho_p ** 2 - rho * rho_pp) / \
        (rho ** 2 + rho_p ** 2) ** 1.5


def brute_force_rho(weak_points, center, r_T, phi, zeta_fn, samples=20001):
    """Error heights by dense sampling of the normal ray.

    Independent of the production path: indicator values come from
    matplotlib's point-in-polygon, and the integral is a plain trapezoid of
    the sampled integrand.
    """
    path = MplPath(np.vstack([weak_points, weak_points[:1]]))
    center = np.asarray(center, dtype=float)
    out = np.empty(len(phi))
    ell = np.linspace(-r_T / 2, r_T / 2, samples)
    for i, angle in enumerate(phi):
        e = np.array([np.cos(angle), np.sin(angle)])
        pts = center + r_T * e - np.outer(ell, e)
        chi = path.contains_points(pts).astype(float)
        chibar = (ell > 0).astype(float)
        zeta = zeta_fn(ell / r_T)
        plus = np.trapezoid(np.where(ell > 0, (chibar - chi) * zeta, 0.0), ell)
        minus = np.trapezoid(np.where(ell < 0, (chi - chibar) * zeta, 0.0), ell)
        out[i] = plus - minus
    return out


def circle_family_rho(weak_center, weak_radius, z, r_T, phi, zeta_integral):
    """Closed-form error heights for a circular weak curve.

    Assumes the weak circle is star shaped about z; zeta_integral is the
    cumulative integral of the cutoff from 0 (odd function).
    """
    d = np.asarray(weak_center, dtype=float) - np.asarray(z, dtype=float)
    dd = np.hypot(d[0], d[1])
    psi = np.arctan2(d[1], d[0])
    rad = dd * np.cos(phi - psi) + np.sqrt(
        weak_radius ** 2 - dd ** 2 * np.sin(phi - psi) ** 2)
    ell_star = r_T - rad
    return r_T * zeta_integral(np.clip(ell_star, -r_T / 2, r_T / 2) / r_T)


def shift_ode_circle_family(weak_center_of_t, weak_radius_of_t, t_ext,
                            zeta_integral, t_span, n_eval=2000, rtol=1e-10):
    """Tightly integrated shift ODE for a circular weak family.

    Uses the closed-form rho above and scipy's adaptive integrator; serves
    as the independent reference for the Picard driver.
    """
    phi = 2 * np.pi * np.arange(256) / 256
    nbar = -np.column_stack([np.cos(phi), np.sin(phi)])

    def rhs(t, y):
        z = y[:2]
        T = t + y[2]
        r_T = np.sqrt(max(2.0 * (t_ext - T), 1e-14))
        rho = circle_family_rho(weak_center_of_t(t), weak_radius_of_t(t),
                                z, r_T, phi, zeta_integral)
        zdot = 6.0 / r_T ** 2 * (rho[:, None] * nbar).mean(axis=0)
        tdot = 4.0 / r_T * rho.mean()
        return [zdot[0], zdot[1], tdot]

    sol = solve_ivp(rhs, t_span, [0.0, 0.0, 0.0], rtol=rtol, atol=1e-12,
                    t_eval=np.linspace(*t_span, n_eval), method="RK45")
    return sol.t, sol.y[:2].T, sol.y[2]


def mode_ode_energy_exponent(k, c_T, c_z, shifts, r0=1.0, r_stop=0.2,
                             amplitude=1e-3):
    """Fitted exponent of E vs r for the exact per-mode scalar ODE.

    The k = 0 mode couples to the time dilation (its radius sees the
    dilated clock); all other modes evolve against r^2 = r0^2 - 2t.
    """
    if k == 0 and shifts:
        def rhs(t, y):
            c, r = y
            tdot = c_T * c / r
            return [(1.0 - c_T) * c / r ** 2, -(1.0 + tdot) / r]

        sol = solve_ivp(rhs, [0, 0.499 * r0 ** 2], [amplitude, r0],
                        rtol=1e-11, atol=1e-14, dense_output=True,
                        events=lambda t, y: y[1] - r_stop)
        c = sol.y[0]
        r = sol.y[1]
        energy = np.pi * c ** 2 / r
    else:
        coeff = {True: {1: -c_z / 2.0}}.get(shifts, {}).get(k)
        if coeff is None:
            coeff = (1.0 - k ** 2)   # diffusion part only
        def rhs(t, y):
            r2 = r0 ** 2 - 2.0 * t
            return coeff * y[0] / r2

        t_end = 0.5 * (r0 ** 2 - r_stop ** 2)
        ts = np.linspace(0, t_end, 400)
        sol = solve_ivp(rhs, [0, t_end], [amplitude], rtol=1e-11, atol=1e-14,
                        t_eval=ts)
        r = np.sqrt(r0 ** 2 - 2.0 * sol.t)
        energy = (1.0 + k ** 2) * sol.y[0] ** 2 * np.pi / (2.0 * r)
        if k == 0:
            energy = np.pi * sol.y[0] ** 2 / r
    window = (r <= 0.8 * r0) & (r >= 0.2 * r0)
    slope = np.polyfit(np.log(r[window]), np.log(energy[window]), 1)[0]
    return float(slope)


def shoelace_area(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def peanut_curve(n, neck=0.55, scale=1.0):
    """Simple non-convex dumbbell-like curve (polar r = scale (1 - neck cos 2t))."""
    t = 2 * np.pi * np.arange(n) / n
    r = scale * (1.0 - neck * np.cos(2 * t))
    return np.column_stack([r * np.cos(t), r * np.sin(t)])
