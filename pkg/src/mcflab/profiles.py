"""Smooth cutoff profiles used by the calibration and the error heights.

All profiles are piecewise polynomial (quintic smoothstep bridges), so
values, derivatives and antiderivatives are available in closed form.
"""

from dataclasses import dataclass, field

import numpy as np


def _smoothstep(x):
    """C^2 quintic smoothstep on [0,1]: 0 -> 1 with flat ends."""
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def _smoothstep_int(x):
    """Antiderivative of the quintic smoothstep, zero at 0."""
    return x ** 4 * (2.5 + x * (-3.0 + x))


_SMOOTHSTEP_MAX_SLOPE = 1.875  # attained at x = 1/2


@dataclass(frozen=True)
class PlateauProfile:
    """Even profile: 1 on |s| <= inner, 0 on |s| >= outer, C^2 bridge between."""

    inner: float
    outer: float

    def value(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        x = np.clip((a - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        return 1.0 - _smoothstep(x)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        w = self.outer - self.inner
        x = (a - self.inner) / w
        inside = (x > 0.0) & (x < 1.0)
        slope = np.where(inside, -30.0 * np.clip(x, 0, 1) ** 2
                         * (1.0 - np.clip(x, 0, 1)) ** 2 / w, 0.0)
        return slope * np.sign(s)

    def integral0(self, s):
        """Integral of the profile from 0 to s (odd in s)."""
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        w = self.outer - self.inner
        x = np.clip((a - self.inner) / w, 0.0, 1.0)
        val = np.minimum(a, self.inner) + w * (x - _smoothstep_int(x))
        return np.sign(s) * val

    @property
    def max_slope(self):
        return _SMOOTHSTEP_MAX_SLOPE / (self.outer - self.inner)

    @property
    def breaks(self):
        return np.array([-self.outer, -self.inner, self.inner, self.outer])


# Bridge of the signed-weight profile: the slope runs from -1 at s = 1/4 to 0
# at s = 1/2 through a plateau at -_PLATEAU_G, tuned so the profile lands
# exactly at -1 while keeping the sup of |slope| at 3.5 (the admissibility
# constraint is 4).
_PLATEAU_G = 3.5
_EPS1 = 1.0 / 6.0
_EPS2 = 1.0 / 6.0


def _ramp_bridge_slope(x):
    """Slope (in s units) of the signed-weight bridge, x in [0,1]."""
    x = np.asarray(x, dtype=float)
    g = np.full_like(x, -_PLATEAU_G)
    lo = x <= _EPS1
    hi = x >= 1.0 - _EPS2
    g = np.where(lo, -(1.0 + (_PLATEAU_G - 1.0) * _smoothstep(np.clip(x / _EPS1, 0, 1))), g)
    g = np.where(hi, -_PLATEAU_G * _smoothstep(np.clip((1.0 - x) / _EPS2, 0, 1)), g)
    return g


def _ramp_bridge_int(x):
    """Integral of the bridge slope from 0 to x, closed form."""
    x = np.asarray(x, dtype=float)
    G = _PLATEAU_G
    v_eps1 = -_EPS1 - (G - 1.0) * _EPS1 * 0.5
    lo = -np.clip(x, 0, _EPS1) - (G - 1.0) * _EPS1 * _smoothstep_int(np.clip(x / _EPS1, 0, 1))
    mid = v_eps1 - G * (np.clip(x, _EPS1, 1.0 - _EPS2) - _EPS1)
    hi_x = np.clip((1.0 - x) / _EPS2, 0, 1)
    hi = v_eps1 - G * (1.0 - _EPS2 - _EPS1) - G * _EPS2 * (0.5 - _smoothstep_int(hi_x))
    out = np.where(x <= _EPS1, lo, np.where(x <= 1.0 - _EPS2, mid, hi))
    return out


@dataclass(frozen=True)
class SignedWeightProfile:
    """Odd profile: -s on |s| <= 1/4, saturating at -/+ 1 beyond |s| = 1/2."""

    def value(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        x = np.clip((a - 0.25) * 4.0, 0.0, 1.0)
        mag = np.where(a <= 0.25, a, 0.25 - 0.25 * _ramp_bridge_int(x))
        mag = np.where(a >= 0.5, 1.0, mag)
        return -np.sign(s) * mag

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        x = (a - 0.25) * 4.0
        d = np.where(a <= 0.25, -1.0, 0.0)
        bridge = (x > 0.0) & (x < 1.0)
        d = np.where(bridge, _ramp_bridge_slope(np.clip(x, 0, 1)), d)
        return d

    @property
    def max_slope(self):
        return _PLATEAU_G

    @property
    def breaks(self):
        b = np.array([0.25, 0.25 + _EPS1 / 4.0, 0.5 - _EPS2 / 4.0, 0.5])
        return np.concatenate([-b[::-1], b])


@dataclass(frozen=True)
class CutoffProfiles:
    """The three cutoffs of the calibration construction.

    eta:       1 on |s| <= 1/8, 0 on |s| >= 1/4, |eta'| <= 16
    zeta:      1 on |s| <= 1/(16 C_zeta), 0 beyond |s| = 1/(8 C_zeta)
    theta_bar: -s on |s| <= 1/4, saturating at -/+1 beyond 1/2, |theta_bar'| <= 4
    """

    c_zeta: float = 4.0
    eta: PlateauProfile = field(default=None)
    zeta: PlateauProfile = field(default=None)
    theta_bar: SignedWeightProfile = field(default=None)

    def __post_init__(self):
        if self.c_zeta < 1.0:
            raise ValueError(f"c_zeta must be >= 1, got {self.c_zeta}")
        if self.eta is None:
            object.__setattr__(self, "eta", PlateauProfile(0.125, 0.25))
        if self.zeta is None:
            object.__setattr__(
                self, "zeta",
                PlateauProfile(1.0 / (16.0 * self.c_zeta), 1.0 / (8.0 * self.c_zeta)))
        if self.theta_bar is None:
            object.__setattr__(self, "theta_bar", SignedWeightProfile())


def profile_eval(profiles, which, s):
    """Evaluate one of the named cutoff profiles at s."""
    try:
        prof = {"eta": profiles.eta, "zeta": profiles.zeta,
                "theta_bar": profiles.theta_bar}[which]
    except KeyError:
        raise ValueError(f"unknown profile {which!r}") from None
    return prof.value(s)
