"""Command-line front end.

Subcommands: ``analyze`` (full wave report to JSON), ``curve`` (F(nu(i beta))
versus nu(i beta) on a beta grid, CSV), ``spectrum`` (axis bands CSV plus
traced off-axis curves JSON), ``selftest`` (analytic oracle suite).

Exit codes: 0 success, 1 configuration or wave-existence error, 2 internal
consistency failure (an existence corollary fired with no matching point),
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, kernel
from .config import RunConfig, default_config, load_config
from .errors import (
    ConfigError,
    KgHopfError,
    NoOrbitError,
    NoPeriodicOrbitError,
    TurningPointError,
)
from .hhcriterion import (
    asymptotic_check,
    compute_indices,
    corollary_report,
    extended_F,
    scan_hh_points,
    small_nu_check,
)
from .hill import ScanResolutionWarning, band_structure
from .potentials import derivative_residuals, sine_gordon
from .spectrum2d import trace_spectrum
from .waveform import (
    HillCoefficient,
    WaveParameters,
    build_profile,
    compute_period,
    hill_coefficient,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONSISTENCY = 2
EXIT_NUMERICAL = 3

_CONFIG_ERRORS = (ConfigError, NoOrbitError, NoPeriodicOrbitError,
                  TurningPointError, ValueError)


def _fmt(x: float) -> str:
    """17 significant digits, locale-free: bit-stable regression diffs."""
    return f"{x:.17g}"


def _write_csv(path: str, header: str, rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v)
                              for v in row) + "\n")


def _np_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: str, payload) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, default=_np_default)
        fh.write("\n")


def _build_wave(cfg: RunConfig):
    pot = cfg.build_potential()
    w = WaveParameters(c=cfg.c, E=cfg.e)
    prof = build_profile(pot, w, cfg.nodes)
    coef = hill_coefficient(pot, prof)
    return pot, w, prof, coef


def cmd_analyze(cfg: RunConfig, out_dir: str) -> int:
    """Full pipeline: wave, band structure, indices, HH points, corollaries."""
    pot, w, prof, coef = _build_wave(cfg)
    T = coef.T
    nu_min = cfg.resolve_nu_min(T)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ScanResolutionWarning)
        bands = band_structure(coef, nu_min, grid_step=cfg.hill_scan_step)
        points = scan_hh_points(coef, cfg.c, nu_min,
                                grid_step=cfg.hh_scan_step, bands=bands)
    indices = compute_indices(coef, cfg.c)
    report = corollary_report(coef, cfg.c, indices, bands, points,
                              c4_depth=cfg.c4_depth)
    asym = asymptotic_check(coef, cfg.c)
    small = small_nu_check(coef, cfg.c)

    band_rows = []
    for i, b in enumerate(bands.bands):
        band_rows.append({
            "index": i,
            "nu_left": b.nu_left, "nu_right": b.nu_right,
            "left_kind": b.left.kind, "left_multiplicity": b.left.multiplicity,
            "right_kind": b.right.kind,
            "right_multiplicity": b.right.multiplicity,
        })
    hh_rows = []
    for p in points:
        t = p.trans
        hh_rows.append({
            "nu_star": p.nu_star, "beta": p.beta, "band_index": p.band_index,
            "residual": p.residual, "double_point": t.double_point,
            "t0": t.t0, "t1": t.t1,
            "delta_plus": t.delta_hat_plus if t.double_point else t.delta_plus,
            "delta_minus": t.delta_hat_minus if t.double_point else t.delta_minus,
        })

    payload = {
        "tool": {"name": "kghopf", "version": __version__,
                 "kernel_backend": kernel.BACKEND},
        "config": cfg.echo(),
        "wave": {"regime": prof.regime, "T": T, "c": cfg.c, "E": cfg.e,
                 "winding": prof.winding, "nodes": cfg.nodes,
                 "energy_drift": float(np.max(prof.energy_residuals()))},
        "indices": {"gamma_M": indices.gamma_m, "gamma_P": indices.gamma_p,
                    "delta_nu_at_0": indices.delta_nu_at_0,
                    "evans_curvature_sign": indices.evans_curvature_sign,
                    "degenerate": indices.degenerate},
        "bands": band_rows,
        "gaps": [{"nu_left": a, "nu_right": b} for a, b in bands.gaps],
        "nu_max": bands.nu_max,
        "nu_min_scanned": bands.nu_min_scanned,
        "hh_points": hh_rows,
        "corollaries": [
            {"name": r.name, "fired": r.fired, "matched": r.matched,
             "consistent": r.consistent, "detail": r.detail}
            for r in report.rows
        ],
        "inconclusive_gaps": [{"nu_left": a, "nu_right": b}
                              for a, b in report.inconclusive_gaps],
        "asymptotic_check": [
            {"nu": a.nu, "ratio": a.ratio, "sin_abs": a.sin_abs}
            for a in asym
        ],
        "small_nu_check": {"branch": small.branch,
                           "predicted": small.predicted,
                           "measured": small.measured},
        "scan_warnings": [str(wm.message) for wm in caught],
    }
    _write_json(os.path.join(out_dir, "analysis.json"), payload)

    if cfg.out_format == "csv":
        _write_csv(os.path.join(out_dir, "bands.csv"),
                   "index,nu_left,nu_right,left_kind,left_multiplicity,"
                   "right_kind,right_multiplicity",
                   [[str(r["index"]), r["nu_left"], r["nu_right"],
                     r["left_kind"], str(r["left_multiplicity"]),
                     r["right_kind"], str(r["right_multiplicity"])]
                    for r in band_rows])
        _write_csv(os.path.join(out_dir, "hh_points.csv"),
                   "nu_star,beta,band_index,residual,double_point,"
                   "delta_plus,delta_minus",
                   [[r["nu_star"], r["beta"], str(r["band_index"]),
                     r["residual"], str(r["double_point"]).lower(),
                     r["delta_plus"], r["delta_minus"]] for r in hh_rows])

    if not report.consistent:
        print("consistency failure: an existence corollary fired without a "
              "matching Hamiltonian-Hopf point", file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


def curve_rows(coef: HillCoefficient, c: float, nu_min: float,
               samples: int) -> List[List]:
    """Rows (beta, nu, F-or-empty, kind) on a uniform beta grid.

    ``kind`` is finite/regularized/+inf/-inf; infinite rows leave F empty."""
    beta_max = abs(c * c - 1.0) * math.sqrt(-nu_min)
    csq = (c * c - 1.0) ** 2
    rows: List[List] = []
    for beta in np.linspace(0.0, beta_max, samples):
        nu = -(beta * beta) / csq
        fv = extended_F(coef, c, nu)
        if fv.kind == "finite":
            kind = "regularized" if fv.regularized else "finite"
            rows.append([beta, nu, fv.value, kind])
        else:
            kind = "+inf" if fv.kind == "plus_infinity" else "-inf"
            rows.append([beta, nu, "", kind])
    return rows


def cmd_curve(cfg: RunConfig, out_dir: str) -> int:
    """CSV of F(nu(i beta)) and nu(i beta) on a uniform beta grid."""
    pot, w, prof, coef = _build_wave(cfg)
    nu_min = cfg.resolve_nu_min(coef.T)
    rows = curve_rows(coef, cfg.c, nu_min, cfg.curve_samples)
    _write_csv(os.path.join(out_dir, "curve.csv"), "beta,nu,F,kind", rows)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out_dir: str) -> int:
    """Trace the level set of the spectrum indicator; emit bands and curves."""
    pot, w, prof, coef = _build_wave(cfg)
    T = coef.T
    im_max = cfg.resolve_im_max(T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScanResolutionWarning)
        curves = trace_spectrum(coef, cfg.c,
                                window=(cfg.re_min, cfg.re_max, cfg.im_min,
                                        im_max),
                                grid=(cfg.nx, cfg.ny), threads=cfg.threads)
    _write_csv(os.path.join(out_dir, "axis_bands.csv"), "beta_lo,beta_hi",
               [[lo, hi] for lo, hi in curves.axis_bands])
    payload = [[[float(x), float(y)] for x, y in seg]
               for seg in curves.segments]
    _write_json(os.path.join(out_dir, "curves.json"), payload)
    return EXIT_OK


@dataclass
class _SelftestRow:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _selftest_rows(inject_failure: Optional[str] = None) -> List[_SelftestRow]:
    rows: List[_SelftestRow] = []

    # constant-coefficient discriminant oracle
    worst = 0.0
    for p0 in (0.0, 1.0, -2.0):
        coef = HillCoefficient.from_constant(p0, 2.5)
        nus = np.linspace(-30.0, p0 + 4.0, 40)
        from .hill import monodromy_many
        out, _ = monodromy_many(coef, nus, order=0)
        delta = out[:, 0, 0] + out[:, 0, 3]
        ws = np.sqrt((p0 - nus).astype(complex))
        closed = (2.0 * np.cos(ws * 2.5)).real
        worst = max(worst, float(np.max(np.abs(delta - closed))))
    rows.append(_SelftestRow("constant-coefficient discriminant", worst, 1e-8))

    # Abel invariant on the same coefficients
    coef = HillCoefficient.from_constant(1.0, 2.5)
    rng = np.random.default_rng(20240901)
    nus = rng.uniform(-40.0, 3.0, 50)
    from .hill import monodromy_many
    out, _ = monodromy_many(coef, nus, order=0)
    det = out[:, 0, 0] * out[:, 0, 3] - out[:, 0, 1] * out[:, 0, 2]
    rows.append(_SelftestRow("Abel determinant", float(np.max(np.abs(det - 1.0))),
                             1e-9))

    # harmonic small-oscillation period
    pot = sine_gordon()
    T = compute_period(pot, WaveParameters(c=1.45, E=1e-3))
    rows.append(_SelftestRow(
        "harmonic-limit period",
        abs(T - 2.0 * math.pi * math.sqrt(1.45 ** 2 - 1.0)) / T, 1e-3))

    # finite-difference derivative consistency of the built-in potential
    us = rng.uniform(-10.0, 10.0, 100)
    r1, r2 = derivative_residuals(pot, us)
    rows.append(_SelftestRow("potential derivative consistency",
                             float(max(r1.max(), r2.max())), 1e-6))

    # zero-potential F identity at guarded probes
    coef0 = HillCoefficient.from_constant(0.0, math.pi)
    worst = 0.0
    for nu in np.linspace(-45.3, -0.4, 25):
        if abs(math.sin(math.pi * math.sqrt(-nu))) <= 0.3:
            continue
        fv = extended_F(coef0, 2.0, float(nu))
        worst = max(worst, abs(fv.value - 4.0 * nu) / (1.0 + abs(4.0 * nu)))
    rows.append(_SelftestRow("zero-potential F identity", worst, 1e-9))

    if inject_failure is not None:
        found = False
        for row in rows:
            if row.name == inject_failure:
                row.tolerance = 0.0
                found = True
        if not found:
            raise ConfigError(f"unknown selftest row {inject_failure!r}")
    return rows


def cmd_selftest(inject_failure: Optional[str] = None) -> int:
    rows = _selftest_rows(inject_failure)
    width = max(len(r.name) for r in rows)
    print(f"{'check':<{width}}  {'residual':>12}  {'tolerance':>12}  status")
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {r.residual:>12.3e}  {r.tolerance:>12.3e}  "
              f"{status}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_NUMERICAL


_DEFAULTS_EPILOG = """\
configuration defaults (overridable in the INI file; 'auto' values are
derived from the wave period T once it is known):
  [potential] name=sine_gordon (or polynomial + coefficients = c0 c1 ...)
  [wave]      c=1.45  E=6.0  nodes=1024
  [hill]      nu_min=auto [-(40/T)^2]   scan_step=auto [(pi/T)/16 in sqrt(-nu)]
  [hh]        scan_step=auto  c4_depth=0.0
  [spectrum]  re_min=-1 re_max=1 im_min=0 im_max=auto [covers nu >= nu_min]
              nx=512 ny=512
  [curve]     samples=2000
  [output]    directory=.  format=json
exit codes: 0 ok, 1 configuration/wave-existence error, 2 consistency
failure, 3 numerical failure.  Every report echoes the resolved
configuration for exact reruns."""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kghopf",
        description="Floquet spectra and dynamical Hamiltonian-Hopf "
                    "instability points of periodic traveling waves in "
                    "nonlinear Klein-Gordon equations.",
        epilog=_DEFAULTS_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in (("analyze", "wave analysis report (JSON)"),
                      ("curve", "F(nu(i beta)) vs nu(i beta) data (CSV)"),
                      ("spectrum", "2-D spectrum trace (CSV + JSON)")):
        sp = sub.add_parser(name, help=doc)
        sp.add_argument("--config", help="configuration file (INI format)")
        sp.add_argument("--out", default=None,
                        help="output directory (default: config [output] "
                             "directory)")
        sp.add_argument("--format", choices=("csv", "json"), default=None,
                        help="tabular output format for analyze")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads for grid sweeps")
    st = sub.add_parser("selftest", help="run the analytic oracle suite")
    st.add_argument("--inject-failure", default=None, help=argparse.SUPPRESS)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args.inject_failure)

    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.format:
            cfg.out_format = args.format
        if args.threads:
            cfg.threads = args.threads
        cfg.validate()
        out_dir = args.out if args.out is not None else cfg.out_dir
        os.makedirs(out_dir, exist_ok=True)
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "analyze":
            return cmd_analyze(cfg, out_dir)
        if args.command == "curve":
            return cmd_curve(cfg, out_dir)
        return cmd_spectrum(cfg, out_dir)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KgHopfError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
