import numpy as np
import pytest

from mcflab import (ShiftState, ShiftedInterface, ShrinkingCircle,
                    calibration_at)
from mcflab.errors import DegeneratePointError

ZERO = np.zeros(2)


class TestPointValues:
    def test_on_interface(self, unit_interface, profiles):
        ev = calibration_at(unit_interface, (1.0, 0.0), ZERO, 0.0, profiles)
        assert np.allclose(ev.xi, [-1.0, 0.0])
        assert np.allclose(ev.B, [-1.0, 0.0])
        assert ev.vartheta == pytest.approx(0.0, abs=1e-15)
        assert ev.div_xi == pytest.approx(-1.0)

    def test_outside_eta_support(self, unit_interface, profiles):
        ev = calibration_at(unit_interface, (0.5, 0.0), ZERO, 0.0, profiles)
        assert np.allclose(ev.xi, 0.0)
        assert np.allclose(ev.B, 0.0)

    def test_inner_band_weight(self, unit_interface, profiles):
        ev = calibration_at(unit_interface, (0.9, 0.0), ZERO, 0.0, profiles)
        assert ev.vartheta == pytest.approx(-0.1)

    def test_center_singularity(self, unit_interface, profiles):
        with pytest.raises(DegeneratePointError):
            calibration_at(unit_interface, (0.0, 0.0), ZERO, 0.0, profiles)

    def test_xi_bounded_and_zero_far(self, unit_interface, profiles):
        rng = np.random.default_rng(7)
        for _ in range(200):
            x = rng.uniform(-2, 2, size=2)
            if np.hypot(*x) < 1e-3:
                continue
            ev = calibration_at(unit_interface, x, ZERO, 0.0, profiles)
            assert np.linalg.norm(ev.xi) <= 1.0 + 1e-12
            if abs(ev.sdist) >= 0.25:
                assert np.allclose(ev.xi, 0.0)

    def test_vartheta_sign_pattern(self, unit_interface, profiles):
        # negative strictly inside, positive strictly outside
        for rho, sign in [(0.35, -1), (0.7, -1), (0.999, -1),
                          (1.001, 1), (1.4, 1), (2.5, 1)]:
            ev = calibration_at(unit_interface, (rho, 0.0), ZERO, 0.0, profiles)
            assert np.sign(ev.vartheta) == sign


class TestSpaceDerivatives:
    @pytest.mark.parametrize("x", [(0.95, 0.02), (-0.6, 0.75), (0.63, 0.63)])
    def test_grad_and_div_match_fd(self, unit_interface, profiles, x):
        # points with |sdist| <= r/8, away from the cutoff band edges
        ev = calibration_at(unit_interface, x, ZERO, 0.0, profiles)
        assert abs(ev.sdist) < 0.125
        h = 1e-6
        grad_fd = np.empty((2, 2))
        grad_b_fd = np.empty((2, 2))
        for j, delta in enumerate(np.eye(2)):
            plus = calibration_at(unit_interface, np.asarray(x) + h * delta,
                                  ZERO, 0.0, profiles)
            minus = calibration_at(unit_interface, np.asarray(x) - h * delta,
                                   ZERO, 0.0, profiles)
            grad_fd[:, j] = (plus.xi - minus.xi) / (2 * h)
            grad_b_fd[:, j] = (plus.B - minus.B) / (2 * h)
        scale = np.abs(grad_fd).max()
        assert np.abs(grad_fd - ev.grad_xi).max() <= 1e-5 * scale
        assert np.abs(grad_b_fd - ev.grad_B).max() <= 1e-5 * np.abs(grad_b_fd).max()
        assert ev.div_xi == pytest.approx(np.trace(grad_fd), rel=1e-5)
        assert ev.div_B == pytest.approx(np.trace(grad_b_fd), rel=1e-5)

    def test_div_in_eta_band(self, unit_interface, profiles):
        # formula eta'/r - eta H/(1 - H s) also holds across the cutoff band
        x = (0.82, 0.0)   # sdist = 0.18, inside the transition band
        ev = calibration_at(unit_interface, x, ZERO, 0.0, profiles)
        h = 1e-6
        div_fd = 0.0
        for j, delta in enumerate(np.eye(2)):
            plus = calibration_at(unit_interface, np.asarray(x) + h * delta,
                                  ZERO, 0.0, profiles)
            minus = calibration_at(unit_interface, np.asarray(x) - h * delta,
                                   ZERO, 0.0, profiles)
            div_fd += (plus.xi[j] - minus.xi[j]) / (2 * h)
        assert ev.div_xi == pytest.approx(div_fd, rel=1e-5)


class TestTimeDerivatives:
    @pytest.mark.parametrize("x,zdot,tdot", [
        ((0.93, 0.1), (0.03, -0.01), 0.02),
        ((-0.2, 0.93), (0.0, 0.05), -0.04),
        ((0.8, 0.0), (0.02, 0.02), 0.0),
    ])
    def test_dt_fields_match_fd(self, profiles, x, zdot, tdot):
        sc = ShrinkingCircle(0.5)
        z0 = np.array([0.01, -0.02])
        dil0 = 0.002
        t0 = 0.05
        zdot = np.asarray(zdot, float)

        def interface(t):
            return ShiftedInterface(sc, ShiftState(
                z=z0 + (t - t0) * zdot,
                time_dilation=dil0 + (t - t0) * tdot, t=t))

        ev = calibration_at(interface(t0), x, zdot, tdot, profiles)
        h = 1e-6
        plus = calibration_at(interface(t0 + h), x, zdot, tdot, profiles)
        minus = calibration_at(interface(t0 - h), x, zdot, tdot, profiles)
        dt_xi_fd = (plus.xi - minus.xi) / (2 * h)
        dt_theta_fd = (plus.vartheta - minus.vartheta) / (2 * h)
        scale = max(np.abs(dt_xi_fd).max(), 1e-12)
        assert np.abs(ev.dt_xi - dt_xi_fd).max() <= 1e-4 * scale
        assert ev.dt_vartheta == pytest.approx(dt_theta_fd, rel=1e-4)


class TestUniversalBounds:
    def test_calibration_bound_suite(self, profiles):
        """Sampled sup bounds with constant 64 across radii and shift rates."""
        c_tilde = 64.0
        sc = ShrinkingCircle(0.5)
        rng = np.random.default_rng(3)
        for r_T in (0.1, 0.25, 0.5, 1.0):
            t = 0.5 - r_T ** 2 / 2
            si = ShiftedInterface(sc, ShiftState(t=t))
            for _ in range(40):
                rho = rng.uniform(0.3 * r_T, 1.9 * r_T)
                ang = rng.uniform(0, 2 * np.pi)
                x = rho * np.array([np.cos(ang), np.sin(ang)])
                zdot = rng.uniform(-1, 1, 2)
                zdot *= 0.1 / r_T / max(np.linalg.norm(zdot), 1e-9)
                tdot = rng.uniform(-0.1, 0.1)
                ev = calibration_at(si, x, zdot, tdot, profiles)
                assert np.linalg.norm(ev.dt_xi) <= c_tilde / r_T ** 2
                assert abs(ev.div_xi) <= c_tilde / r_T
                assert abs(ev.dt_vartheta) <= c_tilde / r_T ** 3
