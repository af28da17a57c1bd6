import math
import warnings

import numpy as np
import pytest

from kghopf.hill import (
    ScanResolutionWarning,
    band_structure,
    default_grid_step,
    discriminant,
    monodromy,
    monodromy_many,
)
from kghopf.waveform import HillCoefficient

from oracles import const_delta, fd_derivative, fd_second_derivative


class TestConstantCoefficientOracle:
    """P == P0: Delta = 2 cos(T sqrt(P0 - nu)) and differentiated forms."""

    @pytest.mark.parametrize("p0", [0.0, 1.0, -2.0])
    @pytest.mark.parametrize("T", [np.pi, 2.5])
    def test_discriminant_and_derivatives(self, p0, T):
        coef = HillCoefficient.from_constant(p0, T)
        nus = np.linspace(-50.0, p0 + 5.0, 200)
        out, _ = monodromy_many(coef, nus, order=2)
        d = out[:, 0, 0] + out[:, 0, 3]
        dn = out[:, 1, 0] + out[:, 1, 3]
        dnn = out[:, 2, 0] + out[:, 2, 3]
        ref = np.array([const_delta(p0, T, nu) for nu in nus])
        assert np.max(np.abs(d - ref[:, 0])) <= 1e-8
        assert np.max(np.abs(dn - ref[:, 1])) <= 1e-7
        assert np.max(np.abs(dnn - ref[:, 2])) <= 1e-7

    def test_monodromy_closed_form_points(self, coef_zero_pi):
        r = monodromy(coef_zero_pi, -1.0)
        assert r.delta == pytest.approx(-2.0, abs=1e-9)
        assert r.delta_nu == pytest.approx(0.0, abs=1e-9)
        r = monodromy(coef_zero_pi, -2.25)
        assert r.delta == pytest.approx(0.0, abs=1e-9)
        assert r.delta_nu == pytest.approx(np.pi * math.sin(1.5 * np.pi) / 1.5,
                                           abs=1e-9)

    def test_cos_and_cosh_branches(self):
        coef = HillCoefficient.from_constant(1.0, 2.5)
        d, _, _ = discriminant(coef, 0.5)           # nu < P0: trigonometric
        assert d == pytest.approx(2 * math.cos(2.5 * math.sqrt(0.5)), abs=1e-9)
        d, _, _ = discriminant(coef, 3.0)           # nu > P0: hyperbolic
        assert d == pytest.approx(2 * math.cosh(2.5 * math.sqrt(2.0)), abs=1e-8)
        assert d > 2.0


class TestMonodromyProperties:
    def test_abel_determinant_random_nu(self, fig1, rng):
        nus = rng.uniform(-50.0, fig1.bands.nu_max + 5.0, 200)
        out, _ = monodromy_many(fig1.coef, nus, order=0)
        det = out[:, 0, 0] * out[:, 0, 3] - out[:, 0, 1] * out[:, 0, 2]
        assert np.max(np.abs(det - 1.0)) <= 1e-9

    def test_real_nu_real_arithmetic_path(self, fig1):
        r = monodromy(fig1.coef, -3.0)
        for arr in (r.m, r.dm, r.d2m):
            assert arr.dtype == np.float64
        assert isinstance(r.delta, float)

    def test_variational_derivatives_vs_finite_differences(self, fig1, rng):
        coef = fig1.coef
        for nu in rng.uniform(-40.0, -0.5, 6):
            def delta_at(x):
                return discriminant(coef, float(x))[0]

            _, dn, dnn = discriminant(coef, float(nu))
            fd1 = fd_derivative(delta_at, float(nu), 1e-4)
            fd2 = fd_second_derivative(delta_at, float(nu), 1e-3)
            assert abs(dn - fd1) <= 1e-6 * (1 + abs(dn))
            assert abs(dnn - fd2) <= 1e-5 * (1 + abs(dnn))

    def test_wave_periodic_point_at_zero(self, fig1, fig2):
        # f'(z) solves the nu = 0 equation, so Delta(0) = 2 for genuine waves
        for case in (fig1, fig2):
            d0, _, _ = discriminant(case.coef, 0.0)
            assert abs(d0 - 2.0) <= 1e-6


class TestBandStructure:
    def test_zero_potential_all_double_points(self, coef_zero_pi):
        bs = band_structure(coef_zero_pi, -10.0)
        assert bs.nu_max == pytest.approx(0.0, abs=1e-9)
        assert bs.gaps == ()
        # edges at -n^2 shared by touching bands; every interior edge double
        rights = [b.nu_right for b in bs.bands]
        assert rights == pytest.approx([-9.0, -4.0, -1.0, 0.0], abs=1e-9)
        for b in bs.bands[:-1]:
            assert b.right.multiplicity == "double"
        top = bs.bands[-1]
        assert top.right.multiplicity == "simple"
        assert top.right.kind == "periodic"
        # antiperiodic at odd n^2, periodic at even
        assert bs.bands[-1].left.kind == "antiperiodic"   # nu = -1
        assert bs.bands[-2].left.kind == "periodic"       # nu = -4
        assert bs.bands[0].left.kind == "scan_edge"

    def test_fig1_band_structure(self, fig1):
        bs = fig1.bands
        # bands are disjoint and ordered
        for a, b in zip(bs.bands[:-1], bs.bands[1:]):
            assert a.nu_right <= b.nu_left + 1e-12
        # one open gap for the rotational sine-Gordon wave (finite-gap)
        assert len(bs.gaps) == 1
        lo, hi = bs.gaps[0]
        assert lo == pytest.approx(fig1.record["gaps"][0][0], abs=1e-7)
        assert hi == pytest.approx(fig1.record["gaps"][0][1], abs=1e-7)

    def test_fig1_band_interiors(self, fig1):
        for b in fig1.bands.bands:
            probes = np.linspace(b.nu_left, b.nu_right, 7)[1:-1]
            out, _ = monodromy_many(fig1.coef, probes, order=0)
            d = out[:, 0, 0] + out[:, 0, 3]
            assert np.max(np.abs(d)) <= 2.0 + 1e-9

    def test_fig1_endpoint_classification(self, fig1):
        for b in fig1.bands.bands:
            for ep in (b.left, b.right):
                if ep.kind == "scan_edge":
                    continue
                d, dn, dnn = discriminant(fig1.coef, ep.nu)
                target = 2.0 if ep.kind == "periodic" else -2.0
                assert abs(d - target) <= 1e-9 or ep.multiplicity == "double"
                if ep.multiplicity == "simple":
                    assert abs(d - target) <= 1e-9
                    assert abs(dn) > 1e-9
                else:
                    assert abs(dn) <= 1e-9 * (1 + abs(ep.nu)) * 100
                    assert np.sign(dnn) == -np.sign(d)

    def test_monotone_tail_above_spectrum(self, fig1):
        for nu in (fig1.bands.nu_max + 1.0, fig1.bands.nu_max + 3.0):
            d, _, _ = discriminant(fig1.coef, nu)
            assert d > 2.0

    def test_fig1_edges_vs_dense_oracle(self, fig1):
        # 10x finer grid reproduces the same edge set
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bs10 = band_structure(fig1.coef, fig1.nu_min,
                                  grid_step=default_grid_step(fig1.coef.T) / 10)
        assert len(bs10.bands) == len(fig1.bands.bands)
        for a, b in zip(fig1.bands.bands, bs10.bands):
            assert a.nu_left == pytest.approx(b.nu_left, abs=1e-8)
            assert a.nu_right == pytest.approx(b.nu_right, abs=1e-8)

    def test_thin_gap_recovery_warns(self):
        # Mathieu-like coefficient: tiny first gap; a coarse grid steps over
        # it and the critical-point rescue must recover both edges
        T = np.pi
        coef = HillCoefficient.from_callable(
            lambda z: 0.05 * np.cos(2 * z), T, n=512)
        with pytest.warns(ScanResolutionWarning):
            bs = band_structure(coef, -10.0, grid_step=(np.pi / T) / 2)
        gap_widths = [hi - lo for lo, hi in bs.gaps]
        assert any(w < 0.1 for w in gap_widths)

    def test_band_index_lookup(self, fig1):
        bs = fig1.bands
        mid = 0.5 * (bs.bands[3].nu_left + bs.bands[3].nu_right)
        assert bs.band_index_of(mid) == 3
        lo, hi = bs.gaps[0]
        assert bs.band_index_of(0.5 * (lo + hi)) is None
