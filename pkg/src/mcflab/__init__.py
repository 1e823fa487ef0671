"""Numerical laboratory for planar curve shortening near circular extinction.

Simulates perturbed and exactly circular shrinking solutions, builds the
calibration fields and dynamic space-time shifts that stabilize the
comparison, and measures relative-energy decay and shift scaling laws.
"""

from .calibration import CalibrationEval, calibration_at
from .circle import (ShiftState, ShiftedInterface, ShrinkingCircle,
                     extinction_time_from_area, radius_at, shifted_circle)
from .energy import (EnergyBreakdown, ErrorHeights, ModeSpectrum, TimeClass,
                     dissipation_and_classify, e_bulk, e_int, error_heights,
                     mode_spectrum, perturbative_energy, stability_rhs)
from .front_tracking import FTConfig, MarkerCurve, ft_step, resample, run_ft
from .geometry import (CircleDeviation, ClosedCurve, LocalFrame,
                       TubularProjection, circle_closeness, circle_polygon,
                       curve_metrics, ellipse_polygon, frame_at, graph_frame,
                       signed_distance)
from .graph_flow import (FlowState, HeightField, SolverConfig, Trajectory,
                         linearized_rhs, nonlinear_rhs, run, shift_rhs, step)
from .profiles import CutoffProfiles, profile_eval
from .shifts import (PicardConfig, ShiftTrajectory, picard_existence,
                     shift_bounds_check, shift_rhs_general)

__version__ = "0.1.0"
