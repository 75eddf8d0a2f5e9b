import sys
import os

# Add the root directory to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from src.frame import build_frame
from src.profile import WaveParams, build_profile


@pytest.fixture(scope="session")
def cosine_profile():
    """p = 4, omega = 1: phi(x) = sqrt(1 + cos(sqrt(2) x)) on |x| <= pi/sqrt(2)"""
    return build_profile(WaveParams(4.0, 1.0))


@pytest.fixture(scope="session")
def cosine_frame(cosine_profile):
    return build_frame(cosine_profile)


@pytest.fixture(scope="session")
def frames():
    cache = {}

    def get(p, omega=1.0, gamma=1.0):
        key = (float(p), float(omega), float(gamma))
        if key not in cache:
            cache[key] = build_frame(build_profile(WaveParams(*key)))
        return cache[key]

    return get
