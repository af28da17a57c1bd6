"""Acceptance criteria, one test per criterion, tolerances pinned.

Each test prints a single PASS line on success (pytest -s shows them); a
failure reads as the criterion number in the test name.  The expensive 2-D
traces (criterion 9) run once per figure configuration at 512 x 512.
"""

import math
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from kghopf.hill import band_structure, default_grid_step, monodromy_many
from kghopf.hhcriterion import (
    asymptotic_check,
    compute_indices,
    corollary_report,
    extended_F,
    scan_hh_points,
    transversality_data,
)
from kghopf.potentials import sine_gordon
from kghopf.spectrum2d import axis_crossings, trace_spectrum
from kghopf.waveform import (
    HillCoefficient,
    WaveParameters,
    build_profile,
    compute_period,
    hill_coefficient,
)

from oracles import CORPUS, const_delta

def report(num, text):
    print(f"\nACCEPTANCE {num:02d}: PASS  ({text})")


@pytest.fixture(scope="module")
def spectrum_512(fig1, fig2):
    """512 x 512 default-window traces for both figures, with timings."""
    out = {}
    for name, case in (("fig1", fig1), ("fig2", fig2)):
        beta_max = abs(case.c ** 2 - 1.0) * math.sqrt(-case.nu_min)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            curves = trace_spectrum(case.coef, case.c,
                                    window=(-1.0, 1.0, 0.0, beta_max),
                                    grid=(512, 512))
        out[name] = (curves, time.perf_counter() - t0)
    return out


def test_criterion_01_constant_coefficient_oracle():
    t0 = time.perf_counter()
    worst = np.zeros(3)
    for p0 in (0.0, 1.0, -2.0):
        for T in (math.pi, 2.5):
            coef = HillCoefficient.from_constant(p0, T)
            nus = np.linspace(-50.0, p0 + 5.0, 200)
            out, _ = monodromy_many(coef, nus, order=2)
            got = np.stack([out[:, k, 0] + out[:, k, 3] for k in range(3)],
                           axis=1)
            ref = np.array([const_delta(p0, T, nu) for nu in nus])
            worst = np.maximum(worst, np.max(np.abs(got - ref), axis=0))
    elapsed = time.perf_counter() - t0
    assert worst[0] <= 1e-8
    assert worst[1] <= 1e-7
    assert worst[2] <= 1e-7
    assert elapsed < 10.0
    report(1, f"max errors {worst[0]:.1e}/{worst[1]:.1e}/{worst[2]:.1e}, "
              f"{elapsed:.1f}s")


def test_criterion_02_abel_invariant(fig1):
    rng = np.random.default_rng(31415)
    nur = rng.uniform(-50.0, fig1.bands.nu_max + 5.0, 200)
    nuc = (rng.uniform(-50.0, 5.0, 50)
           + 1j * rng.uniform(-10.0, 10.0, 50))
    worst = 0.0
    for nus in (nur, nuc):
        out, _ = monodromy_many(fig1.coef, nus, order=0)
        det = out[:, 0, 0] * out[:, 0, 3] - out[:, 0, 1] * out[:, 0, 2]
        worst = max(worst, float(np.max(np.abs(det - 1.0))))
    assert worst <= 1e-9
    report(2, f"max |det M - 1| = {worst:.2e} over 200 real + 50 complex nu")


def test_criterion_03_wave_periodic_point(fig1, fig2):
    worst = 0.0
    for case in (fig1, fig2):
        out, _ = monodromy_many(case.coef, np.array([0.0]), order=0)
        d0 = out[0, 0, 0] + out[0, 0, 3]
        worst = max(worst, abs(d0 - 2.0))
    assert worst <= 1e-6
    report(3, f"max |Delta(0) - 2| = {worst:.2e} for both figures")


def test_criterion_04_harmonic_limit_period():
    T = compute_period(sine_gordon(), WaveParameters(1.45, 1e-3))
    T0 = 2.0 * math.pi * math.sqrt(1.45 ** 2 - 1.0)
    rel = abs(T - T0) / T
    assert rel <= 1e-3
    report(4, f"|T - 2 pi sqrt(c^2-1)|/T = {rel:.2e}")


def test_criterion_05_zero_potential_f_identity(coef_zero_pi):
    c, T = 2.0, math.pi
    rng = np.random.default_rng(2718)
    worst = 0.0
    n = 0
    while n < 100:
        nu = rng.uniform(-50.0, -0.05)
        if abs(math.sin(T * math.sqrt(-nu))) <= 0.3:
            continue
        fv = extended_F(coef_zero_pi, c, nu)
        worst = max(worst, abs(fv.value - c * c * nu) / (1 + abs(c * c * nu)))
        n += 1
    points = scan_hh_points(coef_zero_pi, c, -50.0)
    assert worst <= 1e-9
    assert points == []
    report(5, f"max rel error {worst:.2e} over 100 probes, 0 HH points")


def test_criterion_06_corollary1_exclusion(fig1, fig2):
    worst_f = 0.0
    min_sep = math.inf
    n_endpoints = 0
    for case in (fig1, fig2):
        for b in case.bands.bands:
            for ep in (b.left, b.right):
                if ep.multiplicity != "simple" or ep.nu >= -1e-6:
                    continue
                n_endpoints += 1
                fv = extended_F(case.coef, case.c, ep.nu)
                worst_f = max(worst_f, abs(fv.value))
                for p in case.points:
                    min_sep = min(min_sep, abs(p.nu_star - ep.nu))
    assert n_endpoints > 0
    assert worst_f <= 1e-6
    assert min_sep > 1e-6
    report(6, f"{n_endpoints} simple negative endpoints: max |F| = "
              f"{worst_f:.2e}, min HH separation {min_sep:.3f}")


def test_criterion_07_lemma_signs(fig1, fig2):
    rng = np.random.default_rng(161803)
    # Lemma 1: F - nu > 0 inside open negative gaps (both figures)
    n_gap = 0
    for case in (fig1, fig2):
        for lo, hi in case.bands.negative_gaps():
            for nu in rng.uniform(lo + 1e-9, min(hi, -1e-9), 10):
                fv = extended_F(case.coef, case.c, float(nu))
                assert fv.f_minus_nu > 0
                n_gap += 1
    assert n_gap >= 20
    # Lemma 2: deep ratio within 0.05 of 1 for the Fig 1 wave
    probes = asymptotic_check(fig1.coef, fig1.c)
    devs = [abs(p.ratio - 1.0) for p in probes]
    assert len(probes) == 5
    assert max(devs) <= 0.05
    assert all(p.f_minus_nu < 0 for p in probes)
    report(7, f"{n_gap} in-gap probes positive; deep ratio dev "
              f"{max(devs):.3f} <= 0.05")


def test_criterion_08_transversality(fig1, fig2):
    rng = np.random.default_rng(577215)
    worst_hh = 0.0
    for case in (fig1, fig2):
        assert case.points
        for p in case.points:
            worst_hh = max(worst_hh, p.trans.min_delta)
    assert worst_hh <= 1e-6
    best_off = math.inf
    n = 0
    while n < 20:
        case = fig1 if n % 2 == 0 else fig2
        b = case.bands.bands[rng.integers(0, len(case.bands.bands))]
        nu = float(rng.uniform(b.nu_left, b.nu_right))
        if nu >= -1e-3 or any(abs(nu - p.nu_star) < 0.05 for p in case.points):
            continue
        t = transversality_data(case.coef, case.c, nu)
        best_off = min(best_off, t.min_delta)
        assert t.min_delta > 1e-3
        n += 1
    report(8, f"min|delta| at HH points {worst_hh:.2e} <= 1e-6; off-HH "
              f"minimum {best_off:.4f} > 1e-3")


def test_criterion_09_figure_reproduction(fig1, fig2, spectrum_512):
    for name, case in (("fig1", fig1), ("fig2", fig2)):
        curves, elapsed = spectrum_512[name]
        assert elapsed < 300.0, f"{name} trace took {elapsed:.0f}s"
        nx, ny = curves.grid
        re_min, re_max, im_min, im_max = curves.window
        cell = math.hypot((re_max - re_min) / (nx - 1),
                          (im_max - im_min) / (ny - 1))
        crossings = axis_crossings(curves)
        hh_betas = sorted(p.beta for p in case.points)
        assert len(crossings) == len(hh_betas), \
            f"{name}: {crossings} vs {hh_betas}"
        for b_ref, b in zip(hh_betas, sorted(crossings)):
            assert abs(b_ref - b) <= cell
        # count agrees with the 10x-resolution scan oracle
        pts10 = scan_hh_points(case.coef, case.c, case.nu_min,
                               grid_step=default_grid_step(case.coef.T) / 10,
                               bands=case.bands)
        assert len(pts10) == len(case.points)
    report(9, "both figures: crossings match HH betas within one cell; "
              "counts match the 10x oracle")


def test_criterion_10_corollary_consistency_corpus():
    pot = sine_gordon()
    assert len(CORPUS) >= 10
    summary = []
    for c, e in CORPUS:
        prof = build_profile(pot, WaveParameters(c, e), 1024)
        coef = hill_coefficient(pot, prof)
        nu_min = -((40.0 / coef.T) ** 2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bands = band_structure(coef, nu_min)
            points = scan_hh_points(coef, c, nu_min, bands=bands)
        idx = compute_indices(coef, c)
        rep = corollary_report(coef, c, idx, bands, points)
        assert rep.consistent, f"(c={c}, E={e}) inconsistent: {rep.rows}"
        summary.append(sum(r.fired for r in rep.rows))
    assert sum(summary) > 0     # the corpus does exercise the predicates
    report(10, f"{len(CORPUS)} configurations consistent, "
               f"{sum(summary)} predicates fired")


def test_criterion_11_cli_determinism(tmp_path):
    cfg = tmp_path / "f.ini"
    cfg.write_text("[potential]\nname = sine_gordon\n"
                   "[wave]\nc = 1.4\nE = 1.5\n")
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        for cmd in ("analyze", "curve"):
            res = subprocess.run(
                [sys.executable, "-m", "kghopf.cli", cmd, "--config",
                 str(cfg), "--out", str(out)],
                capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
        outs.append(out)
    a, b = outs
    same_json = (a / "analysis.json").read_bytes() == \
        (b / "analysis.json").read_bytes()
    same_csv = (a / "curve.csv").read_bytes() == (b / "curve.csv").read_bytes()
    assert same_json and same_csv
    report(11, "analyze and curve outputs byte-identical across reruns")
