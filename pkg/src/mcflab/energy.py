"""Relative-energy functionals between a weak curve and the shifted circle.

The interface error integrates 1 - n . xi over the weak curve, the bulk
error integrates |chi - chi_bar| |theta| over the plane (evaluated exactly
in polar coordinates about the shifted center), and the interface error
heights rho are computed by exact intersection of inward normal rays with
the weak marker polygon.
"""

from dataclasses import dataclass

import numpy as np

from .calibration import xi_field
from .errors import DegenerateGeometryError
from .geometry import curve_frames, point_in_polygon
from .spectral import angular_grid, dphi, dphi2, fourier_integrals

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class ErrorHeights:
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    rho: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class EnergyBreakdown:
    e_int: float
    e_bulk: float
    dissipation: float
    perturbative_e_int: float
    perturbative_e_bulk: float

    @property
    def e_total(self):
        return self.e_int + self.e_bulk


@dataclass(frozen=True)
class ModeSpectrum:
    a: np.ndarray   # indices 0..K
    b: np.ndarray   # indices 1..K stored at b[1:], b[0] unused = 0

    def energy(self, r_T):
        """Perturbative energy a0^2/(2 r) + sum (1+k^2)(a_k^2+b_k^2)/(2 r)."""
        k = np.arange(len(self.a))
        return float(np.sum((1.0 + k ** 2) * (self.a ** 2 + self.b ** 2))
                     / (2.0 * r_T))


@dataclass(frozen=True)
class TimeClass:
    label: str
    threshold: float
    measured_dissipation: float


def star_shaped_radii(curve, center, phi):
    """Radial coordinates of the curve about center at the given angles.

    Returns None when the polygon is not star-shaped about the center;
    otherwise the exact ray/segment intersection distances, one per angle.
    """
    w = curve.points - np.asarray(center, dtype=float)
    ang = np.arctan2(w[:, 1], w[:, 0])
    j0 = int(np.argmin(ang))
    wr = np.roll(w, -j0, axis=0)
    au = np.unwrap(np.arctan2(wr[:, 1], wr[:, 0]))
    inc = np.diff(np.append(au, au[0] + 2.0 * np.pi))
    if not np.all((inc > 0.0) & (inc < np.pi)):
        return None
    phiw = np.mod(phi - au[0], 2.0 * np.pi) + au[0]
    j = np.searchsorted(au, phiw, side="right") - 1
    p0 = wr[j]
    p1 = wr[(j + 1) % len(wr)]
    edge = p1 - p0
    den = np.cos(phi) * edge[:, 1] - np.sin(phi) * edge[:, 0]
    return (p0[:, 0] * edge[:, 1] - p0[:, 1] * edge[:, 0]) / den


def _ray_crossings(origin, direction, pts):
    """Crossing parameters and indicator jumps of one ray against a polygon."""
    a = pts
    e = np.roll(pts, -1, axis=0) - pts
    w = a - origin[None, :]
    den = direction[0] * e[:, 1] - direction[1] * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / den
        s = (w[:, 0] * direction[1] - w[:, 1] * direction[0]) / den
    hit = np.isfinite(ell) & (s >= 0.0) & (s < 1.0)
    sigma = np.where(den > 0, -1.0, 1.0)
    return ell[hit], sigma[hit]


def error_heights(weak, si, profiles, m):
    """Interface error heights rho, rho+- at m equispaced circle points.

    The fast path applies when the weak polygon is star-shaped about the
    shifted center (single crossing per normal ray); otherwise every ray is
    cast against the full polygon with signed indicator jumps.  Rays that
    graze a vertex are retried with a perturbed angle.
    """
    r_T = si.r_T
    center = si.center
    phi = angular_grid(m)
    half = 0.5 * r_T
    zeta_cum = lambda ell: r_T * profiles.zeta.integral0(ell / r_T)
    z_half = float(zeta_cum(half))

    radii = star_shaped_radii(weak, center, phi)
    if radii is not None:
        ell_star = r_T - radii
        rho_plus = zeta_cum(np.clip(ell_star, 0.0, half))
        rho_minus = -zeta_cum(np.clip(ell_star, -half, 0.0))
        return ErrorHeights(rho_plus=rho_plus, rho_minus=rho_minus,
                            rho=rho_plus - rho_minus, phi=phi)

    origins = center[None, :] + r_T * np.column_stack([np.cos(phi), np.sin(phi)])
    far = origins + half * np.column_stack([np.cos(phi), np.sin(phi)])
    inside_far = point_in_polygon(weak.points, far).astype(float)
    rho_plus = np.empty(m)
    rho_minus = np.empty(m)
    for i in range(m):
        ang = phi[i]
        for attempt in range(4):
            d = -np.array([np.cos(ang), np.sin(ang)])
            origin = center + r_T * np.array([np.cos(ang), np.sin(ang)])
            ell, sigma = _ray_crossings(origin, d, weak.points)
            win = (ell > -half) & (ell < half)
            chi_start = inside_far[i]
            near = origin + half * d
            chi_end = float(point_in_polygon(weak.points, near)[0])
            if (win.sum() % 2) == (abs(chi_start - chi_end) % 2):
                break
            ang = phi[i] + (attempt + 1) * 1e-7 * (2.0 * np.pi / m)
        else:
            raise DegenerateGeometryError(
                f"ray at angle {phi[i]:.6f} keeps grazing the weak polygon")
        lneg = win & (ell < 0)
        lpos = win & (ell >= 0)
        int_neg = chi_start * z_half + np.sum(sigma[lneg] * (0.0 - zeta_cum(ell[lneg])))
        chi0 = chi_start + sigma[lneg].sum()
        int_pos = chi0 * z_half + np.sum(sigma[lpos] * (z_half - zeta_cum(ell[lpos])))
        rho_plus[i] = z_half - int_pos
        rho_minus[i] = int_neg
    return ErrorHeights(rho_plus=rho_plus, rho_minus=rho_minus,
                        rho=rho_plus - rho_minus, phi=phi)


def e_int(weak, si, profiles):
    """Interface error: trapezoid quadrature of 1 - n . xi over the weak curve."""
    _, normals, _, _ = curve_frames(weak)
    xi = xi_field(si, weak.points, profiles)
    integrand = 1.0 - np.einsum("ij,ij->i", normals, xi)
    seg = weak.segment_lengths
    weights = 0.5 * (seg + np.roll(seg, 1))
    return float(np.sum(integrand * weights))


def _weight_integral(a, b, r_T, profiles):
    """Vectorized integral of |theta_bar(s/r)| (1 - s/r) over [a, b] per ray."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    breaks = np.concatenate([[-np.inf], profiles.theta_bar.breaks * r_T, [np.inf]])
    total = np.zeros_like(a)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        seg_a = np.clip(a, lo, hi)
        seg_b = np.clip(b, lo, hi)
        halfw = 0.5 * (seg_b - seg_a)
        mid = 0.5 * (seg_a + seg_b)
        s_nodes = mid[:, None] + halfw[:, None] * _GAUSS_X[None, :]
        vals = np.abs(profiles.theta_bar.value(s_nodes / r_T)) * (1.0 - s_nodes / r_T)
        total += halfw * (vals @ _GAUSS_W)
    return total


def e_bulk(weak, si, profiles, m=None):
    """Bulk error in polar coordinates about the shifted center.

    Each angular ray is intersected exactly with the weak polygon; on the
    intervals where the two phase indicators differ, |theta| (1 - s/r_T) is
    integrated in closed form (Gauss panels split at the profile breaks).
    The saturated tail |theta| = 1/r_T far from the interface is covered by
    extending the rays beyond the weak curve's radial extent.
    """
    r_T = si.r_T
    center = si.center
    if m is None:
        m = 4 * len(weak)
    phi = angular_grid(m)

    radii = star_shaped_radii(weak, center, phi)
    if radii is not None:
        ell_star = r_T - radii
        lo = np.minimum(ell_star, 0.0)
        hi = np.maximum(ell_star, 0.0)
        contrib = _weight_integral(lo, hi, r_T, profiles)
        return float(contrib.sum() * 2.0 * np.pi / m)

    r_max = np.max(np.linalg.norm(weak.points - center, axis=1))
    ell_out = r_T - 1.02 * max(r_max, r_T)
    seg_a, seg_b = [], []
    for i in range(m):
        d = -np.array([np.cos(phi[i]), np.sin(phi[i])])
        origin = center + r_T * np.array([np.cos(phi[i]), np.sin(phi[i])])
        ell, sigma = _ray_crossings(origin, d, weak.points)
        pos = np.append(ell, 0.0)          # cut at the strong interface too
        jump = np.append(sigma, 0.0)
        keep = (pos > ell_out) & (pos < r_T)
        order = np.argsort(pos[keep], kind="stable")
        pos, jump = pos[keep][order], jump[keep][order]
        edges = np.concatenate([[ell_out], pos, [r_T]])
        chi = 0.0   # the ray starts beyond the weak curve's extent
        for j in range(len(edges) - 1):
            chibar = 1.0 if edges[j] >= 0.0 else 0.0
            if abs(chi - chibar) > 0.5:
                seg_a.append(edges[j])
                seg_b.append(edges[j + 1])
            if j < len(jump):
                chi += jump[j]
    if not seg_a:
        return 0.0
    contrib = _weight_integral(np.asarray(seg_a), np.asarray(seg_b), r_T, profiles)
    return float(contrib.sum() * 2.0 * np.pi / m)


def perturbative_energy(values, r_T):
    """Leading-order energies (bulk, interface) of a height field."""
    h = np.asarray(values, dtype=float)
    hp = dphi(h) / r_T
    scale = 2.0 * np.pi * r_T / len(h)
    e_bulk_approx = 0.5 * np.sum((h / r_T) ** 2) * scale
    e_int_approx = 0.5 * np.sum(hp ** 2) * scale
    return float(e_bulk_approx), float(e_int_approx)


def mode_spectrum(values, k_max):
    """Orthonormal Fourier coefficients a_0..a_K, b_1..b_K of a height field."""
    h = np.asarray(values, dtype=float)
    n = len(h)
    if k_max > n // 2 - 1:
        raise ValueError(f"k_max={k_max} too large for {n} samples")
    cos_int, sin_int = fourier_integrals(h)
    a = np.empty(k_max + 1)
    b = np.zeros(k_max + 1)
    a[0] = cos_int[0] / np.sqrt(2.0 * np.pi)
    a[1:] = cos_int[1:k_max + 1] / np.sqrt(np.pi)
    b[1:] = sin_int[1:k_max + 1] / np.sqrt(np.pi)
    return ModeSpectrum(a=a, b=b)


def dissipation_and_classify(weak, r_T, lam):
    """Curvature dissipation of the weak curve against the regularity threshold."""
    _, _, curv, _ = curve_frames(weak)
    seg = weak.segment_lengths
    weights = 0.5 * (seg + np.roll(seg, 1))
    measured = float(np.sum(curv ** 2 * weights))
    threshold = lam * 2.0 * np.pi / r_T
    label = "non_regular" if measured >= threshold else "regular"
    return TimeClass(label=label, threshold=float(threshold),
                     measured_dissipation=measured)


def graph_dissipation(values, r_T):
    """Curvature dissipation of a graph state from the exact graph curvature."""
    from .geometry import graph_frame
    h = np.asarray(values, dtype=float)
    hp = dphi(h) / r_T
    hpp = dphi2(h) / r_T ** 2
    _, curv = graph_frame(r_T, h, hp, hpp)
    u = r_T - h
    arc = np.sqrt(u ** 2 + dphi(h) ** 2)
    return float(np.sum(curv ** 2 * arc) * 2.0 * np.pi / len(h))


def stability_rhs(values, r_T, zdot, tdot):
    """Leading-order stability right-hand side, variable and frozen forms.

    The variable-coefficient form is the eight-term sum evaluated with the
    circle values H = 1/r_T, H' = 0; the frozen form is its constant
    coefficient spectral counterpart with the two shift moment terms.
    """
    h = np.asarray(values, dtype=float)
    zdot = np.asarray(zdot, dtype=float)
    n = len(h)
    phi = angular_grid(n)
    nbar = -np.column_stack([np.cos(phi), np.sin(phi)])
    taubar = np.column_stack([-np.sin(phi), np.cos(phi)])
    hp = dphi(h) / r_T
    hpp = dphi2(h) / r_T ** 2
    weight = 2.0 * np.pi * r_T / n          # dH^1 on the circle
    H = 1.0 / r_T
    Hp = 0.0

    def quad(f):
        return float(np.sum(f) * weight)

    n_dot_z = nbar @ zdot
    tau_dot_z = taubar @ zdot
    terms = {
        "curvature_sq": -quad(hpp ** 2),
        "gradient_quad": quad((1.5 * H ** 2 - 1.0 / r_T ** 2) * hp ** 2),
        "height_quad": quad((0.5 * H ** 2 + 1.0 / r_T ** 2) * h ** 2 / r_T ** 2),
        "translation_coupling": -quad((1.0 / r_T ** 2 + H ** 2) * h * n_dot_z),
        "dilation_coupling": -quad(H * h * tdot / r_T ** 2),
        "curvgrad_translation": -quad(Hp * tau_dot_z * h),
        "curvgrad_dilation": -quad(Hp * tdot * hp),
        "curvgrad_cross": quad(2.0 * H * Hp * h * hp),
    }
    r_lot = sum(terms.values())

    dphi_h = dphi(h)
    dphi2_h = dphi2(h)
    dth = 2.0 * np.pi / n
    quad_part = np.sum(dphi2_h ** 2 - 0.5 * dphi_h ** 2 - 1.5 * h ** 2) * dth
    cos_int, sin_int = fourier_integrals(h)
    mass_moment = cos_int[0] / np.sqrt(2.0 * np.pi)
    first_moment_sq = (cos_int[1] ** 2 + sin_int[1] ** 2) / np.pi
    r_frozen = (-quad_part - 4.0 * mass_moment ** 2 - 6.0 * first_moment_sq) / r_T ** 3
    terms["frozen_quadratic"] = -quad_part / r_T ** 3
    terms["frozen_mass_moment"] = -4.0 * mass_moment ** 2 / r_T ** 3
    terms["frozen_first_moment"] = -6.0 * first_moment_sq / r_T ** 3
    return float(r_lot), float(r_frozen), terms
