"""Exception types shared across the package."""


class MalformedCurveError(ValueError):
    """Curve does not satisfy the minimal polygon requirements."""


class DegenerateGeometryError(ValueError):
    """Local geometry (marker spacing, graph denominator) degenerate."""


class AmbiguousProjectionError(ValueError):
    """Query point is equidistant from two non-adjacent arcs."""


class ExtinctError(ValueError):
    """Requested time is at or past the extinction time."""


class DegeneratePointError(ValueError):
    """Evaluation point coincides with the projection singularity."""


class RegimeError(RuntimeError):
    """Height field left the graph regime."""


class StepRejectedError(RuntimeError):
    """Time step exceeds the stability bound."""

    def __init__(self, message, suggested_dt):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class TopologyError(RuntimeError):
    """Evolving curve self-intersected; run is terminal."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to contract."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class EmptyReportError(ValueError):
    """Report emission requested with no results."""
