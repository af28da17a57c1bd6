"""Full Floquet spectrum in a rectangle of the complex growth-rate plane.

The multipliers of the linearized problem are mu(lambda) =
e^{lambda c T/(c^2-1)} mu_H(nu(lambda)) with mu_H the Hill multipliers, so
the spectrum {lambda : some |mu| = 1} is the zero level set of the indicator

    g(lambda) = ln|mu_1(lambda)| * ln|mu_2(lambda)|,

which is symmetric in the two multipliers (no branch tracking) and changes
sign across generic spectral curves.  Off-axis curves are extracted by
marching squares on a grid of g; the imaginary-axis bands, where g vanishes
without changing sign, are computed separately by pulling the 1-D Hill band
structure back through lambda = i |c^2-1| sqrt(-nu).
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from skimage.measure import find_contours

from .hill import MONODROMY_ATOL, MONODROMY_RTOL, band_structure, monodromy_many
from .hhcriterion import HHPoint, nu_of_lambda
from .waveform import HillCoefficient

__all__ = [
    "MultiplierPair",
    "SpectralCurves",
    "ProbeResult",
    "multipliers",
    "indicator_grid",
    "trace_spectrum",
    "axis_crossings",
    "off_axis_probe",
    "evaluate_evans",
]


@dataclass(frozen=True)
class MultiplierPair:
    """Floquet multipliers of the linearized problem at one lambda.

    mu1 * mu2 = e^{2 lambda c T/(c^2-1)} (Abel) and mu1 + mu2 =
    e^{lambda c T/(c^2-1)} Delta(nu(lambda)); ``indicator`` is
    ln|mu1| * ln|mu2|, zero exactly on the spectrum."""

    lam: complex
    mu1: complex
    mu2: complex
    indicator: float


def _multiplier_pair_from_delta(lam: complex, delta: complex, c: float,
                                T: float) -> MultiplierPair:
    # Hill multipliers: roots of mu^2 - delta mu + 1 = 0.  Pick the root with
    # the larger magnitude of delta +- sqrt(delta^2-4) to avoid cancellation;
    # the other is its exact reciprocal.
    root = cmath.sqrt(delta * delta - 4.0)
    cand1 = (delta + root) / 2.0
    cand2 = (delta - root) / 2.0
    mu_h1 = cand1 if abs(cand1) >= abs(cand2) else cand2
    ex = cmath.exp(lam * c * T / (c * c - 1.0))
    mu1 = ex * mu_h1
    mu2 = ex / mu_h1
    g = math.log(abs(mu1)) * math.log(abs(mu2))
    return MultiplierPair(lam=lam, mu1=mu1, mu2=mu2, indicator=g)


def multipliers(coef: HillCoefficient, c: float, lam: complex,
                rtol: float = MONODROMY_RTOL,
                atol: float = MONODROMY_ATOL) -> MultiplierPair:
    """Floquet multipliers at one point of the lambda-plane."""
    nu = nu_of_lambda(complex(lam), c)
    out, _ = monodromy_many(coef, np.array([nu], dtype=np.complex128),
                            order=0, rtol=rtol, atol=atol)
    delta = out[0, 0, 0] + out[0, 0, 3]
    return _multiplier_pair_from_delta(complex(lam), complex(delta), c, coef.T)


def indicator_grid(coef: HillCoefficient, c: float, lams: np.ndarray,
                   threads: int = 1, rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> np.ndarray:
    """ln|mu1| ln|mu2| over an array of lambda values (shape preserved)."""
    lams = np.asarray(lams, dtype=np.complex128)
    nus = (lams / (c * c - 1.0)) ** 2
    flat = np.ascontiguousarray(nus.ravel())

    if threads > 1 and flat.size > 256:
        chunks = np.array_split(np.arange(flat.size), threads * 4)
        deltas = np.empty(flat.size, dtype=np.complex128)

        def work(ix):
            out, _ = monodromy_many(coef, flat[ix], order=0, rtol=rtol,
                                    atol=atol)
            deltas[ix] = out[:, 0, 0] + out[:, 0, 3]

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, [ix for ix in chunks if ix.size]))
    else:
        out, _ = monodromy_many(coef, flat, order=0, rtol=rtol, atol=atol)
        deltas = out[:, 0, 0] + out[:, 0, 3]

    # vectorized indicator: ln|mu1| ln|mu2| = (a + L)(a - L) with
    # a = Re(lambda) c T/(c^2-1) and L = ln|mu_H1|
    root = np.sqrt(deltas * deltas - 4.0)
    mu_a = (deltas + root) / 2.0
    mu_b = (deltas - root) / 2.0
    mu_h = np.where(np.abs(mu_a) >= np.abs(mu_b), mu_a, mu_b)
    with np.errstate(divide="ignore", invalid="ignore"):
        lvals = np.log(np.abs(mu_h))
    a = lams.ravel().real * c * coef.T / (c * c - 1.0)
    g = (a + lvals) * (a - lvals)
    return g.reshape(lams.shape)


@dataclass(frozen=True)
class SpectralCurves:
    """Zero level set of the indicator in a window, plus the axis bands.

    ``segments`` are polylines of (re, im) vertices approximating the
    off-axis spectrum; ``axis_bands`` are (beta_lo, beta_hi) intervals of the
    positive imaginary axis belonging to the spectrum.  ``n_nonfinite``
    counts skipped grid nodes."""

    window: Tuple[float, float, float, float]
    grid: Tuple[int, int]
    segments: Tuple[np.ndarray, ...]
    axis_bands: Tuple[Tuple[float, float], ...]
    n_nonfinite: int


def _axis_bands_from_hill(coef: HillCoefficient, c: float, im_min: float,
                          im_max: float, rtol: float, atol: float):
    """Pull Sigma_H through lambda = i|c^2-1|sqrt(-nu), clipped to the
    window's beta range."""
    csq = abs(c * c - 1.0)
    nu_floor = -(im_max / csq) ** 2 - 1.0
    bands = band_structure(coef, nu_floor, rtol=rtol, atol=atol)
    lo_clip = max(im_min, 0.0)
    out = []
    for b in bands.bands:
        lo, hi = b.nu_left, min(b.nu_right, 0.0)
        if lo >= 0.0 or hi <= lo:
            continue
        beta_lo = max(csq * math.sqrt(-hi), lo_clip)
        beta_hi = min(csq * math.sqrt(-lo), im_max)
        if beta_hi > beta_lo:
            out.append((beta_lo, beta_hi))
    out.sort()
    return tuple(out)


def trace_spectrum(coef: HillCoefficient, c: float,
                   window: Tuple[float, float, float, float],
                   grid: Tuple[int, int] = (256, 256),
                   threads: int = 1,
                   rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> SpectralCurves:
    """Sample the indicator on a grid and extract its zero level set.

    ``window`` is (re_min, re_max, im_min, im_max); ``grid`` is (nx, ny)
    node counts, at least 64 each.  Curve vertices come from marching squares
    with linear interpolation, so their accuracy is one grid cell.
    """
    re_min, re_max, im_min, im_max = map(float, window)
    nx, ny = grid
    if nx < 64 or ny < 64:
        raise ValueError("grid must be at least 64x64")
    re = np.linspace(re_min, re_max, nx)
    im = np.linspace(im_min, im_max, ny)
    dx = re[1] - re[0]
    # a node column exactly on the imaginary axis makes g degenerate there;
    # shift such grids deterministically by a thousandth of a cell
    if np.any(np.abs(re) < 1e-9 * dx):
        re = re + 1e-3 * dx
    lam = re[None, :] + 1j * im[:, None]
    g = indicator_grid(coef, c, lam, threads=threads, rtol=rtol, atol=atol)

    bad = ~np.isfinite(g)
    n_bad = int(bad.sum())
    if n_bad:
        g = g.copy()
        g[bad] = np.nan

    segments: List[np.ndarray] = []
    for contour in find_contours(g, 0.0):
        pts = np.column_stack([
            re_min + contour[:, 1] * dx + (re[0] - re_min),
            im_min + contour[:, 0] * (im[1] - im[0]),
        ])
        # drop consecutive duplicates
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-15, axis=1)
        pts = pts[keep]
        if len(pts) >= 2:
            segments.append(pts)
    segments.sort(key=lambda p: (p[0, 0], p[0, 1]))

    # the axis bands belong to the output only when the window actually
    # contains a stretch of the positive imaginary axis
    if re_min <= 0.0 <= re_max and im_max > 0:
        axis_bands = _axis_bands_from_hill(coef, c, im_min, im_max, rtol, atol)
    else:
        axis_bands = ()
    return SpectralCurves(window=(re_min, re_max, im_min, im_max),
                          grid=(nx, ny), segments=tuple(segments),
                          axis_bands=axis_bands, n_nonfinite=n_bad)


def axis_crossings(curves: SpectralCurves, min_beta_cells: float = 5.0):
    """Betas where traced polylines cross the imaginary axis.

    Crossings are linearly interpolated between consecutive vertices with
    opposite real-part signs; crossings within ``min_beta_cells`` grid cells
    of the origin are dropped (the origin hosts modulational structure, not
    Hamiltonian-Hopf points).  Returns a sorted, cell-width-clustered list.
    """
    re_min, re_max, im_min, im_max = curves.window
    dy = (im_max - im_min) / (curves.grid[1] - 1)
    betas = []
    for seg in curves.segments:
        x, y = seg[:, 0], seg[:, 1]
        flips = np.nonzero(x[:-1] * x[1:] < 0.0)[0]
        for i in flips:
            t = x[i] / (x[i] - x[i + 1])
            betas.append(y[i] + t * (y[i + 1] - y[i]))
        for i in np.nonzero(x == 0.0)[0]:
            betas.append(y[i])
    betas = sorted(b for b in betas if b > min_beta_cells * dy)
    clustered: List[float] = []
    for b in betas:
        if clustered and abs(b - clustered[-1]) <= dy:
            clustered[-1] = 0.5 * (clustered[-1] + b)
        else:
            clustered.append(b)
    return clustered


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of an off-axis spectrum probe around a candidate point."""

    found: bool
    indeterminate: bool
    max_abs_g: float
    n_sign_changes: int

    def __bool__(self) -> bool:
        return self.found and not self.indeterminate


def off_axis_probe(coef: HillCoefficient, c: float, point, radius: Optional[float] = None,
                   n_samples: int = 64, rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> ProbeResult:
    """Witness unstable spectrum accumulating at lambda = i beta.

    Samples the indicator on the off-axis arcs of a circle of the given
    radius around i beta and reports whether it changes sign there.  ``point``
    is an HHPoint or a beta value.  Indeterminate when the indicator is below
    resolution on the whole arc set.
    """
    beta = point.beta if isinstance(point, HHPoint) else float(point)
    if radius is None:
        radius = 1e-2 * (1.0 + beta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False) \
        + np.pi / n_samples
    lams = 1j * beta + radius * np.exp(1j * phis)
    keep = np.abs(np.cos(phis)) >= 0.25
    g = indicator_grid(coef, c, lams[keep], rtol=rtol, atol=atol)
    # count sign changes along each contiguous off-axis arc
    arcs = np.split(np.arange(keep.sum()),
                    np.nonzero(np.diff(np.nonzero(keep)[0]) > 1)[0] + 1)
    n_changes = 0
    for arc in arcs:
        ga = g[arc]
        n_changes += int(np.count_nonzero(ga[:-1] * ga[1:] < 0.0))
    max_abs = float(np.max(np.abs(g)))
    return ProbeResult(found=n_changes > 0,
                       indeterminate=max_abs < 1e-18,
                       max_abs_g=max_abs, n_sign_changes=n_changes)


def evaluate_evans(coef: HillCoefficient, c: float, lam: complex, mu: complex,
                   rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> complex:
    """The characteristic function D(lambda, mu) = det(M(lambda) - mu I).

    Computed from the trace and determinant identities: D = mu^2 -
    (mu1 + mu2) mu + mu1 mu2.  D(lambda, 1) is the periodic Evans function.
    """
    pair = multipliers(coef, c, lam, rtol=rtol, atol=atol)
    tr = pair.mu1 + pair.mu2
    det = cmath.exp(2.0 * complex(lam) * c * coef.T / (c * c - 1.0))
    return mu * mu - tr * mu + det
