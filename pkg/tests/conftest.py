import mpmath as mp
import pytest

from spacetime_probe import fields as fl
from spacetime_probe.geometry import Event


def mp_hankel2_1(z, dps=80):
    """High-precision H^(2)_1; large lower-half-plane arguments need many digits."""
    with mp.workdps(dps):
        return complex(mp.hankel2(1, mp.mpc(z)))


def mp_hyp2f1(a, b, c, z, dps=50):
    with mp.workdps(dps):
        return complex(mp.hyp2f1(a, b, c, mp.mpc(z)))


@pytest.fixture
def vacuum():
    return fl.Vacuum()


@pytest.fixture
def mink_event():
    return Event("inertial-minkowski", (0.3, -0.2, 0.1, 0.7))
