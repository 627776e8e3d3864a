import numpy as np
import pytest
from fractions import Fraction

from nlsgauge import fieldgrid


def random_fraction(rng, max_num=9, max_den=8, nonzero=False):
    while True:
        f = Fraction(int(rng.integers(-max_num, max_num + 1)), int(rng.integers(1, max_den + 1)))
        if f != 0 or not nonzero:
            return f


@pytest.fixture
def grid512():
    return fieldgrid.Grid1D(-20.0, 20.0, 512)


@pytest.fixture
def gaussian_state(grid512):
    x = grid512.x
    values = 0.8 * np.exp(-(x**2) / 16.0) * np.exp(0.3j * np.sin(x / 5.0))
    return fieldgrid.ComplexField(values.astype(complex), grid512)


@pytest.fixture
def smooth_hydro(grid512):
    x = grid512.x
    rho = 0.64 * np.exp(-(x**2) / 8.0) + 1e-8
    S = 0.2 * np.sin(x / 4.0) + 0.05 * x
    return fieldgrid.HydroField(rho=rho, phase=S, grid=grid512)
