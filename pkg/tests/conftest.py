import warnings

import numpy as np
import pytest

from kghopf.hill import band_structure
from kghopf.hhcriterion import scan_hh_points
from kghopf.potentials import sine_gordon
from kghopf.waveform import (
    HillCoefficient,
    WaveParameters,
    build_profile,
    hill_coefficient,
)

from oracles import FIG1, FIG2


class WaveCase:
    """A wave configuration with its derived objects, built once per session."""

    def __init__(self, record):
        self.record = record
        self.c = record["c"]
        self.pot = sine_gordon()
        self.params = WaveParameters(c=record["c"], E=record["e"])
        self.profile = build_profile(self.pot, self.params, 1024)
        self.coef = hill_coefficient(self.pot, self.profile)
        self.nu_min = -((40.0 / self.coef.T) ** 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.bands = band_structure(self.coef, self.nu_min)
            self.points = scan_hh_points(self.coef, self.c, self.nu_min,
                                         bands=self.bands)


@pytest.fixture(scope="session")
def fig1():
    return WaveCase(FIG1)


@pytest.fixture(scope="session")
def fig2():
    return WaveCase(FIG2)


@pytest.fixture(scope="session")
def coef_zero_pi():
    """P == 0 with period pi (closed-form discriminant 2 cos(pi sqrt(-nu)))."""
    return HillCoefficient.from_constant(0.0, np.pi)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)
