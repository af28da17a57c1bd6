"""Dynamical Hamiltonian-Hopf criterion: the extended function F and its roots.

A nonzero imaginary spectral point lambda = i*beta is a dynamical
Hamiltonian-Hopf instability exactly when nu = F(nu) at nu = nu(lambda), where

    F(nu) = -c^2 T^2 (4 - Delta(nu)^2) / (4 Delta_nu(nu)^2),

extended to critical points of the discriminant by +-infinity (simple
critical points inside gaps) or by continuity (double points, one l'Hopital
step: F(nu0) = c^2 T^2 Delta(nu0) / (4 Delta_nunu(nu0)), verified against
numerical limits in the test suite).  Roots of F(nu) - nu are located by
bracketing sign changes of tanh(F(nu) - nu), which is continuous through the
blowups, and refined by bisection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateDiscriminantError,
    InconsistentWithTheoryError,
    NotAWaveCoefficientError,
    ProbeRejectedError,
)
from .hill import (
    MONODROMY_ATOL,
    MONODROMY_RTOL,
    BandStructure,
    band_structure,
    default_grid_step,
    discriminant,
    monodromy_many,
)
from .waveform import HillCoefficient

__all__ = [
    "ExtendedFValue",
    "TransversalityData",
    "HHPoint",
    "Indices",
    "CorollaryRow",
    "CorollaryReport",
    "AsymptoticProbe",
    "SmallNuResult",
    "nu_of_lambda",
    "lambda_of_nu",
    "extended_F",
    "scan_hh_points",
    "compute_indices",
    "corollary_report",
    "asymptotic_check",
    "small_nu_check",
]

log = logging.getLogger(__name__)

# |Delta_nu| below CRIT_TOL*(1+|nu|) marks a critical point; an additional
# |Delta^2 - 4| <= CRIT_TOL marks it as a double point of the spectrum.
CRIT_TOL = 1e-7

FINITE = "finite"
PLUS_INF = "plus_infinity"
MINUS_INF = "minus_infinity"


def nu_of_lambda(lam: complex, c: float) -> complex:
    """nu(lambda) = (lambda / (c^2 - 1))^2."""
    return (lam / (c * c - 1.0)) ** 2


def lambda_of_nu(nu: float, c: float) -> complex:
    """Upper-half-plane pullback lambda = i |c^2 - 1| sqrt(-nu) for nu < 0.

    The lower-half representative is the conjugate (the spectrum is symmetric
    under conjugation)."""
    if nu >= 0:
        raise ValueError(f"lambda_of_nu needs nu < 0, got {nu}")
    return 1j * abs(c * c - 1.0) * math.sqrt(-nu)


@dataclass(frozen=True)
class ExtendedFValue:
    """Value of the extended function F at a real nu.

    ``kind`` is 'finite', 'plus_infinity' or 'minus_infinity'; ``value`` is
    meaningful only when finite.  ``regularized`` marks the double-point
    l'Hopital branch."""

    nu: float
    kind: str
    value: Optional[float]
    regularized: bool = False

    @property
    def f_minus_nu(self) -> float:
        if self.kind == PLUS_INF:
            return math.inf
        if self.kind == MINUS_INF:
            return -math.inf
        return self.value - self.nu


def _extended_f_from_disc(nu, c, T, d, dn, dnn) -> ExtendedFValue:
    scale = 1.0 + abs(nu)
    disc = 4.0 - d * d
    if abs(dn) > CRIT_TOL * scale:
        return ExtendedFValue(nu=nu, kind=FINITE,
                              value=-(c * c) * T * T * disc / (4.0 * dn * dn))
    if abs(disc) > CRIT_TOL:
        kind = PLUS_INF if -disc > 0 else MINUS_INF
        return ExtendedFValue(nu=nu, kind=kind, value=None)
    if abs(dnn) <= CRIT_TOL:
        raise DegenerateDiscriminantError(
            f"Delta_nu and Delta_nunu both vanish at nu={nu}: not a Hill "
            f"discriminant (numerical trouble)")
    # double point: one l'Hopital step on (4 - Delta^2) / (4 Delta_nu^2)
    return ExtendedFValue(nu=nu, kind=FINITE,
                          value=(c * c) * T * T * d / (4.0 * dnn),
                          regularized=True)


def extended_F(coef: HillCoefficient, c: float, nu: float,
               rtol: float = MONODROMY_RTOL, atol: float = MONODROMY_ATOL) -> ExtendedFValue:
    """Evaluate the extended F at real nu."""
    d, dn, dnn = discriminant(coef, float(nu), rtol=rtol, atol=atol)
    return _extended_f_from_disc(float(nu), c, coef.T, d, dn, dnn)


def _g_of(fval: ExtendedFValue) -> float:
    """tanh(F - nu), continuous through the blowups."""
    if fval.kind == PLUS_INF:
        return 1.0
    if fval.kind == MINUS_INF:
        return -1.0
    return math.tanh(fval.f_minus_nu)


@dataclass(frozen=True)
class TransversalityData:
    """Local multiplier expansion data at an on-axis spectral point.

    Interior points (t0 strictly inside (-2, 2)) carry theta0 and delta_pm;
    double points carry t2 and delta_hat_pm.  At a genuine Hamiltonian-Hopf
    point exactly one of the pair vanishes."""

    t0: float
    t1: float
    double_point: bool
    theta0: Optional[float] = None
    delta_plus: Optional[float] = None
    delta_minus: Optional[float] = None
    t2: Optional[float] = None
    delta_hat_plus: Optional[float] = None
    delta_hat_minus: Optional[float] = None

    @property
    def min_delta(self) -> float:
        if self.double_point:
            return min(abs(self.delta_hat_plus), abs(self.delta_hat_minus))
        return min(abs(self.delta_plus), abs(self.delta_minus))


@dataclass(frozen=True)
class HHPoint:
    """A dynamical Hamiltonian-Hopf instability point.

    ``nu_star`` < 0 solves F(nu) = nu; ``beta`` is the positive imaginary
    part of the pullback lambda = i beta; ``band_index`` indexes the band of
    the Hill spectrum containing nu_star."""

    nu_star: float
    beta: float
    band_index: Optional[int]
    residual: float
    trans: TransversalityData


def transversality_data(coef: HillCoefficient, c: float, nu: float,
                        rtol: float = MONODROMY_RTOL,
                        atol: float = MONODROMY_ATOL) -> TransversalityData:
    """Evaluate t0, t1 and the delta pair at nu = nu(i beta) < 0."""
    d, dn, dnn = discriminant(coef, float(nu), rtol=rtol, atol=atol)
    T = coef.T
    csq_m1 = c * c - 1.0
    beta = abs(csq_m1) * math.sqrt(-nu)
    t0 = d
    t1 = 2.0 * beta / csq_m1 ** 2 * dn
    scale = 1.0 + abs(nu)
    if abs(dn) <= CRIT_TOL * scale and abs(d * d - 4.0) <= CRIT_TOL:
        # double point of the spectrum: Delta_nunu has sign opposite to Delta
        rad = -2.0 * dnn if d > 0 else 2.0 * dnn
        if rad <= 0:
            raise InconsistentWithTheoryError(
                f"Delta_nunu at the double point nu={nu} has the same sign "
                f"as Delta; violates the double-root structure")
        t2 = beta / csq_m1 ** 2 * math.sqrt(rad)
        base = c * T / csq_m1
        return TransversalityData(t0=t0, t1=t1, double_point=True, t2=t2,
                                  delta_hat_plus=base + t2,
                                  delta_hat_minus=base - t2)
    theta0 = math.acos(max(-1.0, min(1.0, t0 / 2.0)))
    root = math.sqrt(max(4.0 - t0 * t0, 1e-300))
    base = c * T / csq_m1
    return TransversalityData(t0=t0, t1=t1, double_point=False, theta0=theta0,
                              delta_plus=base + t1 / root,
                              delta_minus=base - t1 / root)


def scan_hh_points(coef: HillCoefficient, c: float, nu_min: float,
                   grid_step: Optional[float] = None,
                   bands: Optional[BandStructure] = None,
                   rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> List[HHPoint]:
    """Locate all sign-change roots of F(nu) - nu on [nu_min, 0).

    The scan grid is uniform in sqrt(-nu) (matching the oscillation of the
    discriminant); each bracketed sign change of tanh(F - nu) is bisected
    until the residual |F(nu*) - nu*| falls below 1e-9 (1 + |nu*|).
    Tangential (even-order) roots are invisible to a sign-change scan and are
    not reported.
    """
    if nu_min >= 0:
        raise ValueError("nu_min must be negative")
    if grid_step is None:
        grid_step = default_grid_step(coef.T)
    if bands is None:
        bands = band_structure(coef, nu_min, rtol=rtol, atol=atol)

    s_max = math.sqrt(-nu_min)
    n = max(int(math.ceil(s_max / grid_step)), 4)
    s = np.linspace(s_max, 0.0, n + 1)[:-1]  # exclude nu = 0 (lambda = 0)
    nu_grid = -s ** 2

    out, _ = monodromy_many(coef, nu_grid, order=2, rtol=rtol, atol=atol)
    d = out[:, 0, 0] + out[:, 0, 3]
    dn = out[:, 1, 0] + out[:, 1, 3]
    dnn = out[:, 2, 0] + out[:, 2, 3]
    g = np.array([
        _g_of(_extended_f_from_disc(float(nu_grid[i]), c, coef.T,
                                    d[i], dn[i], dnn[i]))
        for i in range(nu_grid.size)
    ])

    sat = np.abs(g) == 1.0
    if np.any(sat):
        log.info("tanh scan saturated at +-1 on %d of %d grid points "
                 "(gap regions)", int(sat.sum()), g.size)

    def g_at(nu: float) -> float:
        return _g_of(extended_F(coef, c, nu, rtol=rtol, atol=atol))

    points: List[HHPoint] = []
    idx = np.nonzero(g[:-1] * g[1:] < 0.0)[0]
    for i in idx:
        nu_star = float(brentq(g_at, nu_grid[i], nu_grid[i + 1],
                               xtol=1e-14, rtol=8.9e-16))
        fval = extended_F(coef, c, nu_star, rtol=rtol, atol=atol)
        residual = abs(fval.f_minus_nu)
        if not residual <= 1e-9 * (1.0 + abs(nu_star)):
            # saturated-plateau bracket that pinched on a blowup, not a root
            log.info("discarding bracket at nu=%g: residual %g", nu_star,
                     residual)
            continue
        beta = abs(c * c - 1.0) * math.sqrt(-nu_star)
        trans = transversality_data(coef, c, nu_star, rtol=rtol, atol=atol)
        points.append(HHPoint(
            nu_star=nu_star, beta=beta,
            band_index=bands.band_index_of(nu_star, pad=1e-9 * (1 + abs(nu_star))),
            residual=residual, trans=trans))
    points.sort(key=lambda p: p.nu_star)
    return points


@dataclass(frozen=True)
class Indices:
    """Modulational instability index gamma_M = sgn(Delta_nu(0)) and parity
    index gamma_P = sgn((c^2-1)(c^2 T^2 - Delta_nu(0))).

    ``evans_curvature_sign`` is sgn(c^2 T^2 - Delta_nu(0)), the sign of the
    second derivative of the periodic Evans function at the origin.
    ``degenerate`` flags Delta_nu(0) = c^2 T^2 within tolerance (gamma_P = 0)."""

    gamma_m: int
    gamma_p: int
    delta_nu_at_0: float
    evans_curvature_sign: int
    degenerate: bool


def compute_indices(coef: HillCoefficient, c: float,
                    rtol: float = MONODROMY_RTOL,
                    atol: float = MONODROMY_ATOL) -> Indices:
    """Indices of the wave from the discriminant derivatives at nu = 0.

    Raises NotAWaveCoefficientError unless Delta(0) = 2 within 1e-6."""
    d0, dn0, _ = discriminant(coef, 0.0, rtol=rtol, atol=atol)
    if abs(d0 - 2.0) > 1e-6:
        raise NotAWaveCoefficientError(
            f"Delta(0) = {d0!r} is not 2: coefficient is not a wave "
            f"linearization")
    T = coef.T
    tol_m = 1e-7 * max(1.0, T * T)
    gamma_m = 0 if abs(dn0) <= tol_m else (1 if dn0 > 0 else -1)
    evans = c * c * T * T - dn0
    tol_p = 1e-6 * max(1.0, c * c * T * T)
    degenerate = abs(evans) <= tol_p
    evans_sign = 0 if degenerate else (1 if evans > 0 else -1)
    gamma_p = 0 if degenerate else (
        evans_sign if c * c > 1.0 else -evans_sign)
    return Indices(gamma_m=gamma_m, gamma_p=gamma_p, delta_nu_at_0=float(dn0),
                   evans_curvature_sign=evans_sign, degenerate=degenerate)


@dataclass(frozen=True)
class CorollaryRow:
    name: str
    fired: bool
    matched: bool
    consistent: bool
    detail: str


@dataclass(frozen=True)
class CorollaryReport:
    rows: Tuple[CorollaryRow, ...]
    inconclusive_gaps: Tuple[Tuple[float, float], ...]

    @property
    def consistent(self) -> bool:
        return all(r.consistent for r in self.rows)


def corollary_report(coef: HillCoefficient, c: float, indices: Indices,
                     bands: BandStructure, hh_points: Sequence[HHPoint],
                     c4_depth: float = 0.0,
                     rtol: float = MONODROMY_RTOL,
                     atol: float = MONODROMY_ATOL) -> CorollaryReport:
    """Check the index-based existence predicates against the found points.

    C2: gamma_M gamma_P = -1 implies at least one HH point.
    C3: gamma_M gamma_P = +1, a negative open gap and c^2 > 1 imply one.
    C4: superluminal waves have at least one HH point in each band adjacent
        to every sufficiently negative open gap.  A gap counts as
        sufficiently negative when it lies below ``c4_depth`` and the deep
        sign F - nu < 0 is realized at the midpoints of both adjacent bands
        (the intermediate-value hypothesis behind the corollary); other gaps
        are labeled inconclusive rather than checked.
    """
    neg_gaps = bands.negative_gaps()
    superluminal = c * c > 1.0
    rows = []

    prod = indices.gamma_m * indices.gamma_p
    fired = prod == -1 and not indices.degenerate
    matched = len(hh_points) >= 1
    rows.append(CorollaryRow(
        name="C2", fired=fired, matched=matched,
        consistent=(not fired) or matched,
        detail=f"gamma_M*gamma_P = {prod}"))

    fired = (prod == 1 and not indices.degenerate and superluminal
             and len(neg_gaps) > 0)
    rows.append(CorollaryRow(
        name="C3", fired=fired, matched=matched,
        consistent=(not fired) or matched,
        detail=f"gamma_M*gamma_P = {prod}, {len(neg_gaps)} negative gaps, "
               f"c^2 {'>' if superluminal else '<'} 1"))

    def deep_sign_ok(band_idx: Optional[int]) -> bool:
        if band_idx is None:
            return False
        b = bands.bands[band_idx]
        mid = 0.5 * (b.nu_left + min(b.nu_right, 0.0))
        # near the origin F - nu vanishes and its computed sign is noise
        if mid >= -1e-6:
            return False
        fval = extended_F(coef, c, mid, rtol=rtol, atol=atol)
        return fval.f_minus_nu < 0

    inconclusive = []
    deep_ok = True
    n_deep = 0
    if superluminal:
        pad = 1e-9
        for lo, hi in neg_gaps:
            i_lo = bands.band_index_of(lo, pad=pad * (1 + abs(lo)))
            i_hi = bands.band_index_of(hi, pad=pad * (1 + abs(hi)))
            # a gap abutting the origin has no band to its right on the
            # negative axis; C4 concerns gaps interior to nu < 0
            if (hi > c4_depth or hi >= -1e-6
                    or not (deep_sign_ok(i_lo) and deep_sign_ok(i_hi))):
                inconclusive.append((lo, hi))
                continue
            n_deep += 1
            left_hit = any(p.band_index == i_lo for p in hh_points)
            right_hit = any(p.band_index == i_hi for p in hh_points)
            if not (left_hit and right_hit):
                deep_ok = False
    fired = superluminal and n_deep > 0
    rows.append(CorollaryRow(
        name="C4", fired=fired, matched=deep_ok if fired else False,
        consistent=(not fired) or deep_ok,
        detail=f"{n_deep} sufficiently negative gaps checked, "
               f"{len(inconclusive)} inconclusive"))

    return CorollaryReport(rows=tuple(rows),
                           inconclusive_gaps=tuple(inconclusive))


@dataclass(frozen=True)
class AsymptoticProbe:
    nu: float
    sin_abs: float
    ratio: float
    f_minus_nu: float


def _nudge_probe(T: float, nu: float, guard: float = 0.3) -> float:
    """Shift nu deeper until |sin(T sqrt(-nu))| clears the resonance guard."""
    s = math.sqrt(-nu)
    while abs(math.sin(T * s)) <= guard:
        s += 0.05 * math.pi / T
    return -s * s


def asymptotic_check(coef: HillCoefficient, c: float,
                     nu_probes: Optional[Sequence[float]] = None,
                     rtol: float = MONODROMY_RTOL,
                     atol: float = MONODROMY_ATOL) -> List[AsymptoticProbe]:
    """Deep-spectrum ratio (F(nu) - nu) / ((c^2 - 1) nu) at non-resonant probes.

    The ratio tends to 1 as nu -> -infinity.  Default probes sit at
    nu = -100 k / (c^2-1)^2, k = 1..5, nudged off resonances; explicitly
    passed probes inside the resonance guard raise ProbeRejectedError.
    """
    T = coef.T
    csq_m1 = c * c - 1.0
    if nu_probes is None:
        probes = [_nudge_probe(T, -100.0 * k / csq_m1 ** 2) for k in range(1, 6)]
    else:
        probes = []
        for nu in nu_probes:
            if nu >= 0:
                raise ProbeRejectedError(f"probe nu={nu} is not negative")
            sin_abs = abs(math.sin(T * math.sqrt(-nu)))
            if sin_abs <= 0.3:
                raise ProbeRejectedError(
                    f"probe nu={nu} is within the resonance guard: "
                    f"|sin(T sqrt(-nu))| = {sin_abs:.3f} <= 0.3")
            probes.append(float(nu))

    out = []
    for nu in probes:
        fval = extended_F(coef, c, nu, rtol=rtol, atol=atol)
        fmn = fval.f_minus_nu
        out.append(AsymptoticProbe(
            nu=nu, sin_abs=abs(math.sin(T * math.sqrt(-nu))),
            ratio=fmn / (csq_m1 * nu), f_minus_nu=fmn))
    return out


@dataclass(frozen=True)
class SmallNuResult:
    """Local behavior of F(nu) - nu at nu -> 0^-.

    branch 1 (Delta_nu(0) != 0): F - nu vanishes linearly; ``predicted`` and
    ``measured`` are slopes.  branch 2 (Delta_nu(0) = 0, double point at the
    origin): F - nu tends to the finite limit c^2 T^2 / (2 Delta_nunu(0));
    ``predicted`` and ``measured`` are that limit value."""

    branch: int
    predicted: float
    measured: float
    probes: Tuple[float, ...]


def small_nu_check(coef: HillCoefficient, c: float,
                   rtol: float = MONODROMY_RTOL,
                   atol: float = MONODROMY_ATOL) -> SmallNuResult:
    """Compare the local model of F(nu) - nu at the origin with measurement."""
    T = coef.T
    d0, dn0, dnn0 = discriminant(coef, 0.0, rtol=rtol, atol=atol)
    if abs(d0 - 2.0) > 1e-6:
        raise NotAWaveCoefficientError(
            f"Delta(0) = {d0!r} is not 2: coefficient is not a wave "
            f"linearization")
    tol_m = 1e-7 * max(1.0, T * T)

    def f_minus_nu_at(probes):
        return np.array([extended_F(coef, c, nu, rtol=rtol,
                                    atol=atol).f_minus_nu for nu in probes])

    if abs(dn0) > tol_m:
        predicted = (c * c * T * T - dn0) / dn0
        probes = tuple(x / (T * T) for x in (-1e-3, -2e-3, -4e-3))
        nus = np.array(probes)
        # fit K nu + K2 nu^2 through the probes; K2 kills the O(nu^2) bias
        a = np.column_stack([nus, nus ** 2])
        k, _ = np.linalg.lstsq(a, f_minus_nu_at(probes), rcond=None)[0]
        return SmallNuResult(branch=1, predicted=float(predicted),
                             measured=float(k), probes=probes)

    if dnn0 >= -CRIT_TOL:
        raise InconsistentWithTheoryError(
            f"Delta_nu(0) = 0 with Delta_nunu(0) = {dnn0!r} >= 0: a Hill "
            f"discriminant must have Delta_nunu(0) < 0 at a double origin")
    predicted = c * c * T * T / (2.0 * dnn0)
    # F is evaluated through the generic branch at the probes, which loses
    # accuracy close to the double point at the origin; probe deeper than in
    # the slope branch
    probes = tuple(x / (T * T) for x in (-1e-2, -2e-2, -4e-2))
    nus = np.array(probes)
    # fit L + K nu: the limit value L is the leading behavior here
    a = np.column_stack([np.ones_like(nus), nus])
    lval, _ = np.linalg.lstsq(a, f_minus_nu_at(probes), rcond=None)[0]
    return SmallNuResult(branch=2, predicted=float(predicted),
                         measured=float(lval), probes=probes)
