"""Periodic traveling waves of the Klein-Gordon equation.

The wave profile solves (c^2 - 1) f'' + V'(f) = 0 and conserves the first
integral E = (c^2 - 1)/2 * f'^2 + V(f).  All classification and quadrature is
done on the effective potential sign * V with energy sign * E, where
sign = +1 for superluminal (c^2 > 1) and -1 for subluminal waves; in these
variables f'^2 = 2 (E_eff - V_eff(f)) / |c^2 - 1| >= 0 along the orbit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    NoOrbitError,
    NoPeriodicOrbitError,
    ProfileAccuracyError,
    QuadratureError,
    TurningPointError,
)
from .potentials import Potential

__all__ = [
    "WaveParameters",
    "WaveProfile",
    "HillCoefficient",
    "classify_regime",
    "compute_period",
    "build_profile",
    "hill_coefficient",
]

LIBRATIONAL = "librational"
ROTATIONAL = "rotational"

_SEPARATRIX_TOL = 1e-9
_PROFILE_RTOL = 1e-12
_PROFILE_ATOL = 1e-14
_ENERGY_TOL = 1e-8


@dataclass(frozen=True)
class WaveParameters:
    """Wave speed c and profile energy E. The profile ODE degenerates at
    c = +-1, so |c^2 - 1| must exceed 1e-12."""

    c: float
    E: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and np.isfinite(self.E)):
            raise ValueError("c and E must be finite")
        if abs(self.c * self.c - 1.0) <= 1e-12:
            raise ValueError("wave speed too close to +-1: profile ODE degenerates")

    @property
    def csq_m1(self) -> float:
        return self.c * self.c - 1.0


class _Effective:
    """Effective potential V_eff = sign*V with E_eff = sign*E."""

    def __init__(self, pot: Potential, w: WaveParameters):
        self.pot = pot
        self.sign = 1.0 if w.csq_m1 > 0 else -1.0
        self.e_eff = self.sign * w.E
        self.abs_csq_m1 = abs(w.csq_m1)

    def v_eff(self, u):
        return self.sign * self.pot.v(u)

    def fprime(self, u):
        """|f'| on the orbit at field value u (clipped at turning points)."""
        val = 2.0 * (self.e_eff - self.v_eff(u)) / self.abs_csq_m1
        return np.sqrt(np.maximum(val, 0.0))


def _refine_extremum(fn, grid, i, lo, hi):
    """Refine a grid extremum of fn (a minimum) by bounded scalar minimization."""
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    if a == b:
        return grid[i], fn(grid[i])
    res = minimize_scalar(fn, bounds=(max(a, lo), min(b, hi)), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x), float(res.fun)


def _scan_extrema(eff: _Effective):
    """Global minimum and maximum of V_eff over one period (periodic V) or
    over the potential's search window.  Returns (umin, vmin, umax, vmax)."""
    pot = eff.pot
    if pot.umin_period is not None:
        half = pot.umin_period / 2.0
        lo, hi = -half, pot.umin_period + half
    else:
        lo, hi = pot.u_range
    grid = np.linspace(lo, hi, 4097)
    vals = eff.v_eff(grid)
    imin = int(np.argmin(vals))
    imax = int(np.argmax(vals))
    umin, vmin = _refine_extremum(eff.v_eff, grid, imin, lo, hi)
    umax, vmax = _refine_extremum(lambda u: -eff.v_eff(u), grid, imax, lo, hi)
    vmax = -vmax
    if pot.umin_period is not None:
        # canonical representative nearest zero
        umin -= pot.umin_period * np.round(umin / pot.umin_period)
    return umin, vmin, umax, vmax


def classify_regime(pot: Potential, w: WaveParameters) -> str:
    """Classify the orbit at energy E as librational or rotational.

    Raises
    ------
    NoPeriodicOrbitError
        If E sits on the separatrix (E_eff equals the maximum of V_eff).
    NoOrbitError
        If E_eff does not exceed the minimum of V_eff (no orbit at all).
    """
    eff = _Effective(pot, w)
    _, vmin, _, vmax = _scan_extrema(eff)
    tol = _SEPARATRIX_TOL * (1.0 + abs(vmax))
    if eff.e_eff <= vmin + tol:
        raise NoOrbitError(
            f"E={w.E} admits no orbit: effective energy {eff.e_eff} is not "
            f"above the effective potential minimum {vmin}"
        )
    if abs(eff.e_eff - vmax) <= tol:
        raise NoPeriodicOrbitError(
            f"E={w.E} is a separatrix energy (effective potential maximum "
            f"{vmax}); no periodic orbit exists"
        )
    if eff.e_eff > vmax:
        if pot.umin_period is None:
            raise TurningPointError(
                f"E={w.E} exceeds the effective potential maximum of a "
                f"non-periodic potential: orbit is unbounded"
            )
        return ROTATIONAL
    return LIBRATIONAL


def _turning_points(eff: _Effective, umin: float) -> Tuple[float, float]:
    """Nearest turning points V_eff = E_eff on both sides of the well at umin."""
    pot = eff.pot
    if pot.umin_period is not None:
        span = pot.umin_period
    else:
        span = max(pot.u_range[1] - umin, umin - pot.u_range[0])

    def g(u):
        return eff.e_eff - eff.v_eff(u)

    roots = []
    for direction in (+1.0, -1.0):
        us = umin + direction * np.linspace(0.0, span, 2049)
        vals = g(us)
        idx = np.nonzero(vals[:-1] * vals[1:] <= 0.0)[0]
        if idx.size == 0:
            raise TurningPointError(
                f"no turning point found within {span} of the well at {umin}"
            )
        i = idx[0]
        roots.append(brentq(g, us[i], us[i + 1], xtol=1e-14, rtol=8.9e-16))
    fplus, fminus = roots
    # guard: an interior barrier at the orbit energy means a separatrix
    interior = np.linspace(fminus, fplus, 2049)[1:-1]
    if np.max(eff.v_eff(interior)) >= eff.e_eff - _SEPARATRIX_TOL * (1 + abs(eff.e_eff)):
        raise NoPeriodicOrbitError(
            "orbit energy equals an interior barrier of the effective "
            "potential: separatrix"
        )
    return fminus, fplus


def _quad_checked(integrand, a, b, quad_tol, what):
    # scipy's roundoff-limit warning fires even when the result is far more
    # accurate than we need; only escalate genuinely bad error estimates.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(integrand, a, b, epsabs=quad_tol, epsrel=quad_tol,
                        limit=200)
    if err > max(1e-8, 1e4 * quad_tol) * (1.0 + abs(val)):
        raise QuadratureError(
            f"{what} period quadrature error estimate {err} too large")
    return float(val)


def compute_period(pot: Potential, w: WaveParameters, quad_tol: float = 1e-12) -> float:
    """Fundamental period T of f' by quadrature of the first integral.

    Librational orbits use the substitution u = mid + (width/2) sin(theta),
    which removes the inverse-square-root turning-point singularities;
    rotational orbits integrate df/|f'| over one period of the potential.
    """
    regime = classify_regime(pot, w)
    eff = _Effective(pot, w)
    umin, _, _, _ = _scan_extrema(eff)

    if regime == ROTATIONAL:
        up = pot.umin_period

        def integrand(u):
            return 1.0 / eff.fprime(u)

        return _quad_checked(integrand, umin, umin + up, quad_tol, "rotational")

    fminus, fplus = _turning_points(eff, umin)
    mid = 0.5 * (fplus + fminus)
    halfwidth = 0.5 * (fplus - fminus)

    def integrand(theta):
        u = mid + halfwidth * np.sin(theta)
        val = 2.0 * (eff.e_eff - eff.v_eff(u)) / eff.abs_csq_m1
        if val <= 0.0:
            # only reachable through rounding at the ends; take the limit form
            dv = abs(eff.sign * eff.pot.vp(u))
            val = dv * halfwidth * np.cos(theta) ** 2 / eff.abs_csq_m1
        return halfwidth * np.cos(theta) / np.sqrt(val)

    return 2.0 * _quad_checked(integrand, -np.pi / 2.0, np.pi / 2.0, quad_tol,
                               "librational")


@dataclass(frozen=True)
class WaveProfile:
    """Sampled periodic traveling wave.

    The profile is fixed by the convention f(0) = the point where f' is
    maximal (the minimum of the effective potential), f'(0) > 0.  All spectral
    outputs downstream are invariant under translates of f, so the convention
    only pins reproducibility.

    ``z``, ``f``, ``fp`` hold n_nodes+1 equally spaced samples on [0, T];
    evaluation between nodes uses periodic cubic interpolation of the
    periodic part f(z) - winding * z / T.
    """

    potential: Potential
    params: WaveParameters
    regime: str
    T: float
    winding: float
    z: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    _spline_f: CubicSpline = field(repr=False)
    _spline_fp: CubicSpline = field(repr=False)
    _dense: object = field(repr=False)

    def f_at(self, zq):
        zq = np.asarray(zq, dtype=float)
        zr = np.mod(zq, self.T)
        return self.winding * zq / self.T + self._spline_f(zr)

    def fp_at(self, zq):
        zq = np.asarray(zq, dtype=float)
        return self._spline_fp(np.mod(zq, self.T))

    def energy_residuals(self):
        """|first integral - E| / (1 + |E|) at the nodes."""
        w = self.params
        e = 0.5 * w.csq_m1 * self.fp ** 2 + self.potential.v(self.f)
        return np.abs(e - w.E) / (1.0 + abs(w.E))


def build_profile(pot: Potential, w: WaveParameters, n_nodes: int = 1024) -> WaveProfile:
    """Integrate the profile ODE over one period and sample it.

    Raises
    ------
    ProfileAccuracyError
        If the sampled first integral drifts by more than 1e-8 relative, or
        the profile fails to close up periodically at that tolerance.
    """
    if n_nodes < 256:
        raise ValueError("n_nodes must be at least 256")
    regime = classify_regime(pot, w)
    T = compute_period(pot, w)
    eff = _Effective(pot, w)
    umin, _, _, _ = _scan_extrema(eff)

    f0 = umin
    fp0 = float(eff.fprime(f0))
    inv = 1.0 / w.csq_m1

    def rhs(z, y):
        return (y[1], -pot.vp(y[0]) * inv)

    sol = solve_ivp(rhs, (0.0, T), (f0, fp0), method="DOP853",
                    rtol=_PROFILE_RTOL, atol=_PROFILE_ATOL, dense_output=True)
    if not sol.success:
        raise ProfileAccuracyError(f"profile integration failed: {sol.message}",
                                   drift=np.inf)

    z = np.linspace(0.0, T, n_nodes + 1)
    f, fp = sol.sol(z)

    winding = 0.0
    if regime == ROTATIONAL:
        winding = pot.umin_period if fp0 > 0 else -pot.umin_period

    drift = np.max(np.abs(0.5 * w.csq_m1 * fp ** 2 + pot.v(f) - w.E)) / (1.0 + abs(w.E))
    if drift > _ENERGY_TOL:
        raise ProfileAccuracyError(
            f"energy drift {drift:.3e} exceeds {_ENERGY_TOL}", drift=drift)
    gap_fp = abs(fp[-1] - fp[0])
    gap_f = abs(f[-1] - f[0] - winding)
    if gap_fp > _ENERGY_TOL * (1.0 + abs(fp0)) or gap_f > _ENERGY_TOL:
        raise ProfileAccuracyError(
            f"profile fails to close: |df'|={gap_fp:.3e}, |df - winding|={gap_f:.3e}",
            drift=max(gap_fp, gap_f))

    # periodic interpolants of the periodic parts (endpoint clamped to machine
    # periodicity, the defect is within the validated closure tolerance)
    pf = f - winding * z / T
    pf[-1] = pf[0]
    fpc = fp.copy()
    fpc[-1] = fpc[0]
    spline_f = CubicSpline(z, pf, bc_type="periodic")
    spline_fp = CubicSpline(z, fpc, bc_type="periodic")

    return WaveProfile(potential=pot, params=w, regime=regime, T=T,
                       winding=winding, z=z, f=f, fp=fp,
                       _spline_f=spline_f, _spline_fp=spline_fp,
                       _dense=sol.sol)


@dataclass(frozen=True)
class HillCoefficient:
    """Periodic coefficient P(z) of Hill's equation y'' + P y = nu y.

    Stores a periodic cubic spline on a uniform grid in the layout consumed
    by the monodromy kernel: ``coeffs[i] = [a, b, c, d]`` meaning
    a + b t + c t^2 + d t^3 on cell i.  ``source`` records whether P came
    from a wave linearization or was supplied synthetically for testing.
    """

    T: float
    source: str
    h_cell: float
    coeffs: np.ndarray

    def p_at(self, zq):
        zq = np.mod(np.asarray(zq, dtype=float), self.T)
        m = self.coeffs.shape[0]
        i = np.minimum((zq / self.h_cell).astype(int), m - 1)
        t = zq - i * self.h_cell
        a, b, c, d = (self.coeffs[i, k] for k in range(4))
        return a + t * (b + t * (c + t * d))

    @property
    def p_max(self) -> float:
        zs = np.linspace(0.0, self.T, 4 * self.coeffs.shape[0] + 1)
        return float(np.max(self.p_at(zs)))

    @classmethod
    def from_samples(cls, z: np.ndarray, p: np.ndarray, source: str) -> "HillCoefficient":
        T = float(z[-1])
        gap = abs(p[-1] - p[0])
        if gap > 1e-8 * (1.0 + abs(p[0])):
            raise ValueError(
                f"P is not periodic: |P(T) - P(0)| = {gap:.3e}")
        pc = p.copy()
        pc[-1] = pc[0]
        cs = CubicSpline(z, pc, bc_type="periodic")
        coeffs = np.ascontiguousarray(cs.c[::-1].T)
        return cls(T=T, source=source, h_cell=T / coeffs.shape[0], coeffs=coeffs)

    @classmethod
    def from_callable(cls, fn, T: float, n: int = 2048,
                      source: str = "synthetic") -> "HillCoefficient":
        z = np.linspace(0.0, float(T), n + 1)
        return cls.from_samples(z, np.asarray(fn(z), dtype=float), source)

    @classmethod
    def from_constant(cls, p0: float, T: float) -> "HillCoefficient":
        m = 16
        coeffs = np.zeros((m, 4))
        coeffs[:, 0] = p0
        return cls(T=float(T), source="synthetic", h_cell=float(T) / m,
                   coeffs=np.ascontiguousarray(coeffs))


def hill_coefficient(pot: Potential, prof: WaveProfile, n: int = 4096) -> HillCoefficient:
    """P(z) = V''(f(z)) / (c^2 - 1) sampled densely from the wave profile."""
    z = np.linspace(0.0, prof.T, n + 1)
    if prof._dense is not None:
        f = prof._dense(z)[0]
    else:
        f = prof.f_at(z)
    p = pot.vpp(f) / prof.params.csq_m1
    return HillCoefficient.from_samples(z, p, source="wave")
