import math

import pytest

from src.eigensolver import compute_spectrum
from src.operators import Geometry

T_HALF = 0.5
OMEGA_HALF = math.pi


def default_geometry(r, **kwargs):
    """T = [-1/2, 1/2], Ω = [-π, π]: |T||Ω|/2π = 1，于是 N = 32r+65，M = 32r-1"""
    return Geometry.for_dilation(T_HALF, OMEGA_HALF, r, **kwargs)


@pytest.fixture(scope='session')
def spectrum_for():
    """按 r 缓存默认几何上的完整特征分解"""
    cache = {}

    def get(r):
        if r not in cache:
            cache[r] = compute_spectrum(default_geometry(r))
        return cache[r]

    return get


@pytest.fixture(scope='session')
def spec8(spectrum_for):
    return spectrum_for(8)


@pytest.fixture(scope='session')
def spec16(spectrum_for):
    return spectrum_for(16)


@pytest.fixture(scope='session')
def spec32(spectrum_for):
    return spectrum_for(32)
