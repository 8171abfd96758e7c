"""Shared fixtures: the demonstration operating point and helper grids."""

import math

import numpy as np
import pytest

from ramseylock import FieldParams, ScrambleKey, WriteKey

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def write_field():
    """Recording field: 565 Hz Rabi frequency, 110 Hz detuning."""
    return FieldParams(TWO_PI * 565.0, TWO_PI * 110.0, "W")


@pytest.fixture(scope="session")
def scramble_field():
    """Scrambling field: 169 Hz Rabi frequency, 100 Hz detuning."""
    return FieldParams(TWO_PI * 169.0, TWO_PI * 100.0, "S")


@pytest.fixture(scope="session")
def write_key(write_field):
    return WriteKey(write_field, tau=0.44e-3)


@pytest.fixture(scope="session")
def scramble_key(scramble_field):
    return ScrambleKey(scramble_field, tau=1.48e-3, phi_S=0.0, T1=5e-3)


@pytest.fixture(scope="session")
def fast_scramble_field():
    """A scrambling field with a 10x-plus faster pulse at the same detuning;
    its pi/2 pulse splits the populations almost exactly 50/50."""
    return FieldParams(TWO_PI * 5000.0, TWO_PI * 100.0, "S")


@pytest.fixture(scope="session")
def readout_grid():
    """0..20 ms in 0.1 ms steps (201 points; two-plus fringe periods)."""
    return np.arange(0.0, 20.0001e-3, 1.0e-4)
