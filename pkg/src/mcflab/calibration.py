"""Closed-form calibration fields (xi, B, theta) for the shifted circle.

Everything is evaluated exactly from the tubular geometry of a circle:
sdist = r_T - |x - z|, projected normal -(x - z)/|x - z|, curvature 1/r_T.
The curvature-gradient terms are carried explicitly (they vanish for the
circle) so the formulas keep the shape used for near-circular solutions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointError


@dataclass(frozen=True)
class CalibrationEval:
    xi: np.ndarray
    B: np.ndarray
    vartheta: float
    div_xi: float
    dt_xi: np.ndarray
    dt_vartheta: float
    grad_xi: np.ndarray
    grad_B: np.ndarray
    div_B: float
    sdist: float


def calibration_at(si, x, zdot, tdot, profiles):
    """Evaluate the calibration and all its derivatives at one point.

    zdot is the translation velocity and tdot the time-dilation rate; they
    enter only the time derivatives dt_xi and dt_vartheta.
    """
    x = np.asarray(x, dtype=float)
    zdot = np.asarray(zdot, dtype=float)
    r_T = si.r_T
    w = x - si.center
    rho = float(np.hypot(w[0], w[1]))
    if rho < 1e-14 * r_T:
        raise DegeneratePointError("evaluation at the projection singularity")

    sdist = r_T - rho
    nbar = -w / rho
    taubar = np.array([nbar[1], -nbar[0]])   # J^{-1} nbar
    H = 1.0 / r_T
    Hprime = 0.0                              # circle: curvature constant
    jac = 1.0 - H * sdist                     # = rho / r_T

    sigma = sdist / r_T
    eta = float(profiles.eta.value(sigma))
    eta_p = float(profiles.eta.derivative(sigma))
    tb = float(profiles.theta_bar.value(sigma))
    tb_p = float(profiles.theta_bar.derivative(sigma))

    nn = np.outer(nbar, nbar)
    tt = np.outer(taubar, taubar)

    xi = eta * nbar
    B = eta * H * nbar
    vartheta = tb / r_T

    grad_xi = (eta_p / r_T) * nn - eta * (H / jac) * tt
    div_xi = eta_p / r_T - eta * H / jac
    grad_B = H * grad_xi + (Hprime / jac) * np.outer(nbar, taubar)
    div_B = H * div_xi

    one_p = 1.0 + tdot
    dt_sdist = -H * one_p - float(nbar @ zdot)
    dt_eta_arg = dt_sdist / r_T + sdist * one_p / r_T ** 3
    dt_xi = eta * (-(Hprime * one_p / jac) + (H / jac) * float(taubar @ zdot)) * taubar \
        + eta_p * dt_eta_arg * nbar
    dt_vartheta = one_p / r_T ** 3 * tb + (tb_p / r_T) * dt_eta_arg

    return CalibrationEval(xi=xi, B=B, vartheta=float(vartheta),
                           div_xi=float(div_xi), dt_xi=dt_xi,
                           dt_vartheta=float(dt_vartheta), grad_xi=grad_xi,
                           grad_B=grad_B, div_B=float(div_B), sdist=float(sdist))


def xi_field(si, points, profiles):
    """Vectorized xi at an (M,2) array of points (interface-error quadrature)."""
    pts = np.asarray(points, dtype=float)
    w = pts - si.center
    rho = np.hypot(w[:, 0], w[:, 1])
    r_T = si.r_T
    bad = rho < 1e-14 * r_T
    rho_safe = np.where(bad, 1.0, rho)
    nbar = -w / rho_safe[:, None]
    sdist = r_T - rho
    eta = profiles.eta.value(sdist / r_T)
    out = eta[:, None] * nbar
    out[bad] = 0.0
    return out
