"""Discrete differential geometry of closed planar marker curves.

Conventions: curves are positively oriented (enclosed region on the left),
the inward unit normal is J * tangent with J the counter-clockwise rotation
by 90 degrees, and curvature is positive for a convex curve, so a circle of
radius r has curvature 1/r.
"""

import functools
from dataclasses import dataclass

import numpy as np

from .errors import (AmbiguousProjectionError, DegenerateGeometryError,
                     MalformedCurveError)


@dataclass(frozen=True)
class LocalFrame:
    normal: np.ndarray
    tangent: np.ndarray
    curvature: float
    curvature_derivative: float


@dataclass(frozen=True)
class TubularProjection:
    sdist: float
    foot: np.ndarray
    foot_frame: LocalFrame
    valid: bool


@dataclass(frozen=True)
class CircleDeviation:
    length_dev: float
    normal_dev: float
    curvature_dev: float
    curvature_grad_dev: float

    def max(self):
        return max(self.length_dev, self.normal_dev,
                   self.curvature_dev, self.curvature_grad_dev)


class ClosedCurve:
    """Closed marker polygon; samples are cyclic, the last edge closes back."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise MalformedCurveError(
                f"need at least 3 planar samples, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise MalformedCurveError("curve samples must be finite")
        seg = np.roll(pts, -1, axis=0) - pts
        seglen = np.hypot(seg[:, 0], seg[:, 1])
        scale = max(np.abs(pts).max(), 1e-300)
        if np.any(seglen < 1e-14 * scale):
            raise MalformedCurveError("consecutive samples coincide")
        self.points = pts
        self.points.setflags(write=False)
        self._seglen = seglen

    def __len__(self):
        return len(self.points)

    @property
    def segment_lengths(self):
        return self._seglen

    @property
    def length(self):
        return float(self._seglen.sum())

    @property
    def signed_area(self):
        x, y = self.points[:, 0], self.points[:, 1]
        return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def positively_oriented(self):
        return self.signed_area > 0.0

    @property
    def centroid(self):
        """Area centroid by the shoelace moment formula."""
        p, q = self.points, np.roll(self.points, -1, axis=0)
        cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
        a = 0.5 * cross.sum()
        cx = np.sum((p[:, 0] + q[:, 0]) * cross) / (6.0 * a)
        cy = np.sum((p[:, 1] + q[:, 1]) * cross) / (6.0 * a)
        return np.array([cx, cy])

    def reversed(self):
        return ClosedCurve(self.points[::-1])

    def is_simple(self):
        import shapely
        ring = shapely.LineString(np.vstack([self.points, self.points[:1]]))
        return bool(shapely.is_simple(ring))

    @functools.cached_property
    def _frame_arrays(self):
        return _frames(self.points, self._seglen)

    @functools.cached_property
    def tubular_radius(self):
        """Conservative radius within which the nearest-point projection is safe."""
        r_est = self.length / (2.0 * np.pi)
        return min(0.5 * r_est, 0.5 * _neck_distance(self))

    def to_csv(self, path):
        np.savetxt(path, self.points, delimiter=",", header="x,y",
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        return cls(np.loadtxt(path, delimiter=",", skiprows=1))


def _frames(pts, seglen):
    """Vectorized nonuniform three-point frames at every sample."""
    lp = seglen                      # |x_{i+1} - x_i|
    lm = np.roll(seglen, 1)          # |x_i - x_{i-1}|
    xp = np.roll(pts, -1, axis=0)
    xm = np.roll(pts, 1, axis=0)
    denom = (lm * lp * (lm + lp))[:, None]
    d1 = (lm[:, None] ** 2 * xp + (lp ** 2 - lm ** 2)[:, None] * pts
          - lp[:, None] ** 2 * xm) / denom
    d2 = 2.0 * (lm[:, None] * xp - (lm + lp)[:, None] * pts + lp[:, None] * xm) / denom
    speed = np.hypot(d1[:, 0], d1[:, 1])
    tangent = d1 / speed[:, None]
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])  # J * tangent
    curvature = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed ** 3
    kp = np.roll(curvature, -1)
    km = np.roll(curvature, 1)
    curv_deriv = (lm ** 2 * kp + (lp ** 2 - lm ** 2) * curvature - lp ** 2 * km) \
        / (lm * lp * (lm + lp))
    return tangent, normal, curvature, curv_deriv


def _neck_distance(curve):
    """Smallest euclidean gap between genuinely distinct arcs of the curve.

    Vertex pairs count only when their straight distance undercuts 0.6 of
    their arc distance; points that are merely neighbours along the curve
    (for which euclidean ~ arc, as on any convex curve) never qualify.
    """
    pts = curve.points
    n = len(pts)
    arc = np.concatenate([[0.0], np.cumsum(curve.segment_lengths)])
    s = arc[:-1]
    length = arc[-1]
    ds = np.abs(s[:, None] - s[None, :])
    arc_dist = np.minimum(ds, length - ds)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    neck = d < 0.6 * arc_dist
    if not neck.any():
        return np.inf
    return float(d[neck].min())


def curve_metrics(curve):
    """Perimeter and enclosed (positive) area of the marker polygon."""
    return curve.length, abs(curve.signed_area)


def frame_at(curve, index):
    """Local frame (inward normal, tangent, curvature, curvature derivative)."""
    if not curve.positively_oriented:
        raise MalformedCurveError("frame_at requires a positively oriented curve")
    n = len(curve)
    if not -n <= index < n:
        raise IndexError(f"sample index {index} out of range for {n} samples")
    lm = np.roll(curve.segment_lengths, 1)[index]
    lp = curve.segment_lengths[index]
    scale = curve.length / n
    if min(lm, lp) < 1e-12 * scale:
        raise DegenerateGeometryError("coincident neighbouring samples")
    tangent, normal, curv, curv_d = curve._frame_arrays
    return LocalFrame(normal=normal[index].copy(), tangent=tangent[index].copy(),
                      curvature=float(curv[index]),
                      curvature_derivative=float(curv_d[index]))


def curve_frames(curve):
    """All frames at once: (tangents, normals, curvatures, curvature_derivs)."""
    if not curve.positively_oriented:
        raise MalformedCurveError("curve_frames requires positive orientation")
    return curve._frame_arrays


def point_in_polygon(pts, query):
    """Crossing-number inside test, vectorized over query points (M,2)."""
    q = np.atleast_2d(np.asarray(query, dtype=float))
    a = pts[None, :, :]
    b = np.roll(pts, -1, axis=0)[None, :, :]
    y = q[:, 1][:, None]
    straddles = ((a[:, :, 1] <= y) & (b[:, :, 1] > y)) | \
                ((a[:, :, 1] > y) & (b[:, :, 1] <= y))
    with np.errstate(divide="ignore", invalid="ignore"):
        x_int = a[:, :, 0] + (y - a[:, :, 1]) / (b[:, :, 1] - a[:, :, 1]) \
            * (b[:, :, 0] - a[:, :, 0])
    hits = straddles & (x_int > q[:, 0][:, None])
    return (hits.sum(axis=1) % 2).astype(bool)


def signed_distance(curve, query):
    """Signed distance to the curve: positive inside the enclosed region.

    Nearest point by exhaustive projection onto every segment; the sign is
    obtained from a point-in-polygon test.  When the query is (numerically)
    equidistant from two non-adjacent arcs the projection is ill-defined and
    an AmbiguousProjectionError is raised.
    """
    q = np.asarray(query, dtype=float)
    pts = curve.points
    n = len(pts)
    a = pts
    e = np.roll(pts, -1, axis=0) - pts
    w = q[None, :] - a
    t = np.clip(np.einsum("ij,ij->i", w, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    proj = a + t[:, None] * e
    dist = np.linalg.norm(proj - q[None, :], axis=1)
    best = int(np.argmin(dist))
    d_best = dist[best]

    tol = 1e-9 * curve.length / n + 1e-12
    close = np.nonzero(dist <= d_best + tol)[0]
    gaps = np.minimum((close - best) % n, (best - close) % n)
    if np.any(gaps >= 3):
        raise AmbiguousProjectionError(
            f"query {q} equidistant from non-adjacent arcs (d={d_best:.3e})")

    inside = bool(point_in_polygon(pts, q)[0])
    sd = d_best if inside else -d_best
    # attribute the foot to the nearer endpoint's sample for the frame
    foot_index = best if t[best] < 0.5 else (best + 1) % n
    frame = frame_at(curve, foot_index)
    return TubularProjection(sdist=float(sd), foot=proj[best],
                             foot_frame=frame,
                             valid=bool(abs(sd) < curve.tubular_radius))


def circle_closeness(curve, r):
    """Quantitative deviation of the curve from some circle of radius r.

    The normal deviation compares the inward normal against the rotating
    unit vector -exp(2 pi i theta / L); the arc-length origin and traversal
    direction are chosen to minimize the sup, making the metric independent
    of the parametrization.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    length, _ = curve_metrics(curve)
    length_dev = abs(length - 2.0 * np.pi * r) / (2.0 * np.pi * r)

    work = curve if curve.positively_oriented else curve.reversed()
    _, normals, curv, curv_d = curve_frames(work)
    seg = work.segment_lengths
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    theta = 2.0 * np.pi * s / length

    nu = normals[:, 0] + 1j * normals[:, 1]
    normal_dev = np.inf
    for th in (theta, (2.0 * np.pi - theta) % (2.0 * np.pi)):
        # distance^2 to target -e^{i(th_i - th_j)} = |nu|^2 + 1 + 2 Re(conj(nu) e^{i(th_i-th_j)})
        w = np.conj(nu) * np.exp(1j * th)
        m = (np.abs(nu) ** 2 + 1.0)[:, None] + 2.0 * np.real(
            w[:, None] * np.exp(-1j * th)[None, :])
        normal_dev = min(normal_dev, float(np.sqrt(np.maximum(m, 0.0).max(axis=0).min())))

    curvature_dev = float(np.max(r * np.abs(curv - 1.0 / r)))
    curvature_grad_dev = float(np.max(r ** 2 * np.abs(curv_d)))
    return CircleDeviation(length_dev=float(length_dev), normal_dev=normal_dev,
                           curvature_dev=curvature_dev,
                           curvature_grad_dev=curvature_grad_dev)


def graph_frame(r, h, hp, hpp):
    """Normal (in the base circle frame) and curvature of a normal graph.

    The graph sits at height h along the inward normal of a circle of
    radius r; hp and hpp are first and second arc-length derivatives of h.
    Returns (normal_components, curvature) with normal_components the
    coefficients on (n_bar, tau_bar).
    """
    r = np.asarray(r, dtype=float)
    h, hp, hpp = (np.asarray(v, dtype=float) for v in (h, hp, hpp))
    one_m = 1.0 - h / r
    denom_sq = one_m ** 2 + hp ** 2
    if np.any(denom_sq < 1e-24):
        raise DegenerateGeometryError("graph frame denominator vanished")
    denom = np.sqrt(denom_sq)
    n_comp = np.stack([one_m / denom, -hp / denom], axis=-1)
    curvature = (one_m * (1.0 / r + hpp - h / r ** 2) + 2.0 * hp ** 2 / r) \
        / denom_sq ** 1.5
    return n_comp, curvature


def circle_polygon(center, radius, n):
    """Positively oriented regular n-gon inscribed in the given circle."""
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.asarray(center, dtype=float) + radius * np.column_stack(
        [np.cos(t), np.sin(t)])
    return ClosedCurve(pts)


def ellipse_polygon(a, b, n, center=(0.0, 0.0)):
    """Positively oriented n-gon on the axis-aligned ellipse (a cos t, b sin t)."""
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.asarray(center, dtype=float) + np.column_stack(
        [a * np.cos(t), b * np.sin(t)])
    return ClosedCurve(pts)
