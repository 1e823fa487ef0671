import numpy as np
import pytest

from mcflab import CutoffProfiles, ShiftedInterface, ShrinkingCircle


@pytest.fixture(scope="session")
def profiles():
    return CutoffProfiles()


@pytest.fixture(scope="session")
def profiles_cz1():
    return CutoffProfiles(c_zeta=1.0)


@pytest.fixture
def unit_interface():
    """Shifted interface over the unit circle (T_ext = 1/2, t = 0, no shift)."""
    return ShiftedInterface(ShrinkingCircle(0.5))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
