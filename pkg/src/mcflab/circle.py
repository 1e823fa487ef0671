"""The shrinking-circle strong solution and its space-time shifted version."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ExtinctError
from .geometry import circle_polygon


@dataclass(frozen=True)
class ShrinkingCircle:
    """Self-similar circle solution r(tau) = sqrt(2 (T_ext - tau))."""

    extinction_time: float
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.extinction_time <= 0:
            raise ValueError(f"extinction_time must be > 0, got {self.extinction_time}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def r0(self):
        return float(np.sqrt(2.0 * self.extinction_time))


def radius_at(sc, tau):
    """Radius of the strong solution at solution time tau."""
    if tau < 0:
        raise ValueError(f"time must be nonnegative, got {tau}")
    if tau >= sc.extinction_time:
        raise ExtinctError(f"tau={tau} is at or past extinction {sc.extinction_time}")
    return float(np.sqrt(2.0 * (sc.extinction_time - tau)))


def extinction_time_from_area(area):
    """Extinction time of a disc of the given area under dA/dt = -2 pi."""
    if area < 0:
        raise ValueError(f"area must be nonnegative, got {area}")
    return area / (2.0 * np.pi)


@dataclass(frozen=True)
class ShiftState:
    """Dynamic space-time shift: translation z and time dilation at time t."""

    z: np.ndarray = field(default_factory=lambda: np.zeros(2))
    time_dilation: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        if not (np.all(np.isfinite(self.z)) and np.isfinite(self.time_dilation)):
            raise ValueError("shift state must be finite")

    @property
    def T(self):
        """Shifted solution time T(t) = t + time_dilation."""
        return self.t + self.time_dilation


@dataclass(frozen=True)
class ShiftedInterface:
    """The strong circle viewed through a space-time shift."""

    circle: ShrinkingCircle
    shift: ShiftState = field(default_factory=ShiftState)

    @property
    def r_T(self):
        return radius_at(self.circle, self.shift.T)

    @property
    def center(self):
        return self.circle.center + self.shift.z

    def at(self, z, time_dilation, t):
        return ShiftedInterface(self.circle, ShiftState(z, time_dilation, t))


def shifted_circle(si, n):
    """Positively oriented n-gon on the shifted interface."""
    return circle_polygon(si.center, si.r_T, n)
