"""Hill's equation engine: monodromy, discriminant and band structure.

The spectral problem is y'' + P(z) y = nu y with T-periodic P.  The monodromy
matrix M(nu) collects the two canonical solutions at z = T; its trace is the
Hill discriminant Delta(nu), and the spectrum is the closed set where
|Delta| <= 2 -- a disjoint union of bands, bounded above and unbounded below.
First and second nu-derivatives of M are propagated simultaneously through
the variational systems, so critical points and double points of the
discriminant are classified from directly integrated quantities rather than
finite differences.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import kernel
from .errors import IntegratorError
from .waveform import HillCoefficient

__all__ = [
    "MonodromyResult",
    "Band",
    "BandEndpoint",
    "BandStructure",
    "ScanResolutionWarning",
    "monodromy",
    "monodromy_many",
    "discriminant",
    "band_structure",
    "default_grid_step",
]

MONODROMY_RTOL = 1e-11
MONODROMY_ATOL = 1e-13

# |Delta_nu| below this (times 1 + |nu|) classifies a critical point as a
# double endpoint; consistent with the integration accuracy.
DOUBLE_POINT_TOL = 1e-7


class ScanResolutionWarning(UserWarning):
    """A band-edge pair was closer than two grid steps; the structure was
    recovered from critical-point information, but a finer grid_step is
    advisable."""


@dataclass(frozen=True)
class MonodromyResult:
    """Monodromy matrix of Hill's equation at one nu, with nu-derivatives.

    ``m`` is [[y1(T), y2(T)], [y1'(T), y2'(T)]]; ``dm`` and ``d2m`` are the
    entry-wise first and second derivatives with respect to nu.  ``delta`` is
    the Hill discriminant tr(m) and ``delta_nu``, ``delta_nunu`` its
    derivatives.  det(m) = 1 up to integration accuracy (Abel).
    """

    nu: complex
    m: np.ndarray
    dm: np.ndarray
    d2m: np.ndarray
    delta: complex
    delta_nu: complex
    delta_nunu: complex


def _as_kernel_input(nus) -> np.ndarray:
    arr = np.asarray(nus)
    if np.iscomplexobj(arr):
        return np.ascontiguousarray(arr, dtype=np.complex128)
    return np.ascontiguousarray(arr, dtype=np.float64)


def monodromy_many(coef: HillCoefficient, nus, order: int = 2,
                   rtol: float = MONODROMY_RTOL, atol: float = MONODROMY_ATOL):
    """Batch monodromy: returns (out, steps) with out[i, k] =
    [y1, y2, y1', y2'](T) at derivative level k.  Real input follows the real
    arithmetic path, so outputs are exactly real."""
    nus = _as_kernel_input(nus)
    out, steps = kernel.propagate_batch(coef.coeffs, coef.h_cell, coef.T,
                                        nus, order, rtol, atol)
    if np.any(steps < 0):
        bad = nus[steps < 0]
        raise IntegratorError(
            f"monodromy integration failed at nu = {bad[:5]}"
            + ("..." if bad.size > 5 else ""))
    return out, steps


def monodromy(coef: HillCoefficient, nu, order: int = 2,
              rtol: float = MONODROMY_RTOL, atol: float = MONODROMY_ATOL) -> MonodromyResult:
    """Monodromy matrix with first and second nu-derivatives at one point."""
    out, _ = monodromy_many(coef, [nu], order=order, rtol=rtol, atol=atol)
    row = out[0]

    def mat(k):
        return np.array([[row[k, 0], row[k, 1]], [row[k, 2], row[k, 3]]])

    m, dm, d2m = mat(0), mat(1), mat(2)
    return MonodromyResult(
        nu=nu, m=m, dm=dm, d2m=d2m,
        delta=m[0, 0] + m[1, 1],
        delta_nu=dm[0, 0] + dm[1, 1],
        delta_nunu=d2m[0, 0] + d2m[1, 1],
    )


def discriminant(coef: HillCoefficient, nu,
                 rtol: float = MONODROMY_RTOL, atol: float = MONODROMY_ATOL):
    """(Delta, Delta_nu, Delta_nunu) at nu."""
    r = monodromy(coef, nu, rtol=rtol, atol=atol)
    return r.delta, r.delta_nu, r.delta_nunu


def _delta_batch(coef, nus, rtol=MONODROMY_RTOL, atol=MONODROMY_ATOL):
    out, _ = monodromy_many(coef, nus, order=2, rtol=rtol, atol=atol)
    d = out[:, 0, 0] + out[:, 0, 3]
    dn = out[:, 1, 0] + out[:, 1, 3]
    dnn = out[:, 2, 0] + out[:, 2, 3]
    return d, dn, dnn


@dataclass(frozen=True)
class BandEndpoint:
    """One endpoint of a spectral band.

    ``kind`` is 'periodic' (Delta = +2), 'antiperiodic' (Delta = -2) or
    'scan_edge' for a band truncated by the scan window; ``multiplicity`` is
    'simple' or 'double' (gap closed), None for scan edges.
    """

    nu: float
    kind: str
    multiplicity: Optional[str]


@dataclass(frozen=True)
class Band:
    left: BandEndpoint
    right: BandEndpoint

    @property
    def nu_left(self) -> float:
        return self.left.nu

    @property
    def nu_right(self) -> float:
        return self.right.nu

    def contains(self, nu: float, pad: float = 0.0) -> bool:
        return self.nu_left - pad <= nu <= self.nu_right + pad


@dataclass(frozen=True)
class BandStructure:
    """Ordered bands and open gaps of the Hill spectrum in the scan window."""

    bands: Tuple[Band, ...]
    gaps: Tuple[Tuple[float, float], ...]
    nu_max: float
    nu_min_scanned: float

    def band_index_of(self, nu: float, pad: float = 0.0) -> Optional[int]:
        for i, b in enumerate(self.bands):
            if b.contains(nu, pad):
                return i
        return None

    def negative_gaps(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(g for g in self.gaps
                     if g[1] <= 1e-9 * (1.0 + abs(g[0])) and g[0] < 0.0)


def default_grid_step(T: float) -> float:
    """Default scan step in s = sqrt(-nu) space.

    Delta oscillates like 2 cos(s T) deep in the spectrum, so a step of
    (pi/T)/16 places 16 grid points per half-oscillation.
    """
    return (np.pi / T) / 16.0


def _scan_grid(coef: HillCoefficient, nu_min: float, grid_step: float) -> np.ndarray:
    """Ascending nu grid: uniform in sqrt(-nu) below zero, uniform in nu
    from 0 up past the spectrum top (beyond max P, Delta > 2 and grows)."""
    nu_hi = coef.p_max + 1.0 + 0.25 * (np.pi / coef.T) ** 2
    s_max = np.sqrt(max(-nu_min, 0.0))
    n_neg = max(int(np.ceil(s_max / grid_step)), 2)
    s = np.linspace(s_max, 0.0, n_neg + 1)
    neg = -s[:-1] ** 2
    pos = np.linspace(0.0, nu_hi, 129)
    return np.concatenate([neg, pos])


def _refine_root(coef, lo, hi, which, rtol, atol):
    """Root of Delta -+ 2 inside [lo, hi] (sign change assumed)."""
    target = 2.0 if which == "periodic" else -2.0

    def fn(nu):
        d, _, _ = discriminant(coef, float(nu), rtol=rtol, atol=atol)
        return d - target

    return float(brentq(fn, lo, hi, xtol=1e-13, rtol=8.9e-16))


def _refine_critical(coef, lo, hi, rtol, atol):
    def fn(nu):
        _, dn, _ = discriminant(coef, float(nu), rtol=rtol, atol=atol)
        return dn

    return float(brentq(fn, lo, hi, xtol=1e-13, rtol=8.9e-16))


def band_structure(coef: HillCoefficient, nu_min: float,
                   grid_step: Optional[float] = None,
                   rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> BandStructure:
    """Locate all bands and gaps of the Hill spectrum in [nu_min, nu_max].

    Band edges are found as sign changes of Delta -+ 2 on the scan grid and
    refined by bisection; critical points of Delta (sign changes of
    Delta_nu) supply double points and recover edges of gaps thinner than
    the grid, which are reported through ScanResolutionWarning.
    """
    if grid_step is None:
        grid_step = default_grid_step(coef.T)
    nu_grid = _scan_grid(coef, nu_min, grid_step)
    d, dn, dnn = _delta_batch(coef, nu_grid, rtol=rtol, atol=atol)

    roots: List[Tuple[float, str]] = []
    for target, kind in ((2.0, "periodic"), (-2.0, "antiperiodic")):
        g = d - target
        idx = np.nonzero(g[:-1] * g[1:] < 0.0)[0]
        for i in idx:
            roots.append((_refine_root(coef, nu_grid[i], nu_grid[i + 1], kind,
                                       rtol, atol), kind))
        for i in np.nonzero(g == 0.0)[0]:
            roots.append((float(nu_grid[i]), kind))

    # critical points: double endpoints and thin-gap recovery
    doubles: List[Tuple[float, str]] = []
    idx = np.nonzero(dn[:-1] * dn[1:] < 0.0)[0]
    for i in idx:
        nu_c = _refine_critical(coef, nu_grid[i], nu_grid[i + 1], rtol, atol)
        d_c, dn_c, dnn_c = discriminant(coef, nu_c, rtol=rtol, atol=atol)
        scale = 1.0 + abs(nu_c)
        if abs(d_c * d_c - 4.0) <= DOUBLE_POINT_TOL:
            kind = "periodic" if d_c > 0 else "antiperiodic"
            doubles.append((nu_c, kind))
        elif d_c * d_c > 4.0:
            # open gap around nu_c; if the grid stepped clean over it (both
            # neighbors in-band) its edges were missed by the sign scan
            if abs(d[i]) <= 2.0 and abs(d[i + 1]) <= 2.0:
                kind = "periodic" if d_c > 0 else "antiperiodic"
                rescued = _rescue_thin_gap(coef, nu_grid, d, i, nu_c, kind,
                                           rtol, atol)
                for r in rescued:
                    roots.append((r, kind))
                if rescued:
                    warnings.warn(
                        f"band edges near nu={nu_c:.6g} are closer than two "
                        f"grid steps; recovered from the critical point. "
                        f"Consider a finer grid_step.",
                        ScanResolutionWarning)
        else:
            warnings.warn(
                f"interior-band critical point of Delta at nu={nu_c:.6g} "
                f"(|Delta| < 2): numerically suspect", ScanResolutionWarning)

    events = _assemble_events(roots, doubles)
    return _assemble_bands(coef, events, nu_grid, d, float(nu_min), rtol, atol)


def _rescue_thin_gap(coef, nu_grid, d, i, nu_c, kind, rtol, atol):
    """Both gap edges around critical point nu_c lie between grid points with
    |Delta| < 2: bracket each side against the in-band neighbors."""
    target = 2.0 if kind == "periodic" else -2.0
    out = []
    # walk outward to grid values on the band side
    lo_i, hi_i = i, i + 1
    while lo_i > 0 and abs(d[lo_i]) > 2.0:
        lo_i -= 1
    while hi_i < len(nu_grid) - 1 and abs(d[hi_i]) > 2.0:
        hi_i += 1
    for a, b in ((nu_grid[lo_i], nu_c), (nu_c, nu_grid[hi_i])):
        fa = discriminant(coef, float(a), rtol=rtol, atol=atol)[0] - target
        fb = discriminant(coef, float(b), rtol=rtol, atol=atol)[0] - target
        if fa * fb < 0:
            out.append(float(brentq(
                lambda nu: discriminant(coef, float(nu), rtol=rtol,
                                        atol=atol)[0] - target,
                a, b, xtol=1e-13, rtol=8.9e-16)))
    return out


def _assemble_events(roots, doubles):
    """Merge simple roots and double points, deduplicating coincidences."""
    events = [(nu, kind, "double") for nu, kind in doubles]
    for nu, kind in roots:
        if any(abs(nu - nu_d) <= 1e-9 * (1.0 + abs(nu_d)) for nu_d, _, _ in events):
            continue
        events.append((nu, kind, "simple"))
    # dedupe simple roots found from both adjacent cells
    events.sort(key=lambda e: e[0])
    merged = []
    for e in events:
        if merged and abs(e[0] - merged[-1][0]) <= 1e-10 * (1.0 + abs(e[0])) \
                and e[1] == merged[-1][1]:
            if merged[-1][2] == "double" or e[2] == "double":
                merged[-1] = (merged[-1][0], merged[-1][1], "double")
            continue
        merged.append(list(e))
    return [tuple(e) for e in merged]


def _assemble_bands(coef, events, nu_grid, d, nu_min, rtol, atol):
    periodic_roots = [e[0] for e in events if e[1] == "periodic"]
    if not periodic_roots:
        raise IntegratorError(
            "no root of Delta - 2 found in the scan window; cannot locate "
            "the top of the spectrum")
    nu_max = max(periodic_roots)

    events = [e for e in events if e[0] <= nu_max + 1e-12]
    bands: List[Band] = []
    gaps: List[Tuple[float, float]] = []

    def delta_at(nu):
        return discriminant(coef, nu, rtol=rtol, atol=atol)[0]

    # walk consecutive event intervals; classify by the midpoint value
    pts = [nu_min] + [e[0] for e in events]
    kinds = [None] + list(events)
    for j in range(len(pts) - 1):
        lo, hi = pts[j], pts[j + 1]
        if hi - lo <= 1e-12 * (1.0 + abs(lo)):
            continue
        mid = 0.5 * (lo + hi)
        in_band = abs(delta_at(mid)) <= 2.0
        right_ev = kinds[j + 1]
        if in_band:
            if j == 0:
                left_ep = BandEndpoint(nu=lo, kind="scan_edge", multiplicity=None)
            else:
                ev = kinds[j]
                left_ep = BandEndpoint(nu=ev[0], kind=ev[1], multiplicity=ev[2])
            right_ep = BandEndpoint(nu=right_ev[0], kind=right_ev[1],
                                    multiplicity=right_ev[2])
            bands.append(Band(left=left_ep, right=right_ep))
        else:
            if j > 0:
                gaps.append((lo, hi))
    # double points split bands: a double event is both a right and a left
    # endpoint; bands on both sides were emitted separately above because the
    # event list contains the double point once.  Nothing else to do.
    return BandStructure(bands=tuple(bands), gaps=tuple(gaps),
                         nu_max=float(nu_max), nu_min_scanned=float(nu_min))
