"""Potentials V(u) for the nonlinear Klein-Gordon equation.

A :class:`Potential` bundles a C^2 function with its first two derivatives.
The built-ins are the sine-Gordon potential V(u) = 1 - cos(u) (the figure
configurations are calibrated to this normalization) and general polynomial
potentials with user-supplied coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import EvaluationDomainError

__all__ = [
    "Potential",
    "sine_gordon",
    "polynomial",
    "derivative_residuals",
]


@dataclass(frozen=True)
class Potential:
    """A C^2 potential with explicit first and second derivatives.

    Parameters
    ----------
    name : str
        Identifier, echoed into reports.
    params : tuple of (str, float)
        Named parameters, kept for config echo only.
    v, vp, vpp : callable
        V, V' and V''.  Must accept floats and numpy arrays.
    umin_period : float, optional
        Spatial period of V in u (2*pi for sine-Gordon).  ``None`` for
        non-periodic potentials; rotational waves then do not exist.
    u_range : (float, float)
        Search window for extrema and turning points of non-periodic
        potentials.  Ignored when ``umin_period`` is set.
    """

    name: str
    params: Tuple[Tuple[str, float], ...]
    v: Callable = field(repr=False)
    vp: Callable = field(repr=False)
    vpp: Callable = field(repr=False)
    umin_period: Optional[float] = None
    u_range: Tuple[float, float] = (-12.0, 12.0)

    def eval(self, u: float) -> Tuple[float, float, float]:
        """Evaluate (V, V', V'') at ``u``.

        Raises
        ------
        EvaluationDomainError
            If any of the three values is non-finite.
        """
        vals = (float(self.v(u)), float(self.vp(u)), float(self.vpp(u)))
        if not all(np.isfinite(vals)):
            raise EvaluationDomainError(
                f"potential {self.name!r} non-finite at u={u!r}: {vals}"
            )
        return vals


def sine_gordon() -> Potential:
    """The sine-Gordon potential V(u) = 1 - cos(u)."""
    return Potential(
        name="sine_gordon",
        params=(),
        v=lambda u: 1.0 - np.cos(u),
        vp=np.sin,
        vpp=np.cos,
        umin_period=2.0 * np.pi,
    )


def polynomial(coefficients, u_range=(-12.0, 12.0)) -> Potential:
    """Polynomial potential sum(c_i * u**i) from a coefficient list c_0..c_n."""
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    p = np.polynomial.Polynomial(coeffs)
    dp = p.deriv()
    d2p = dp.deriv()
    return Potential(
        name="polynomial",
        params=tuple((f"c{i}", float(c)) for i, c in enumerate(coeffs)),
        v=p,
        vp=dp,
        vpp=d2p,
        umin_period=None,
        u_range=(float(u_range[0]), float(u_range[1])),
    )


def derivative_residuals(pot: Potential, us, h: float = 1e-5):
    """Central finite-difference residuals of V' and V'' at the points ``us``.

    Returns two arrays: |V'(u) - (V(u+h)-V(u-h))/(2h)| scaled by 1 + |V'(u)|,
    and the analogous quantity for V'' against differences of V'.  Used by the
    self-test and the consistency test suite.
    """
    us = np.asarray(us, dtype=float)
    fd_vp = (pot.v(us + h) - pot.v(us - h)) / (2.0 * h)
    fd_vpp = (pot.vp(us + h) - pot.vp(us - h)) / (2.0 * h)
    r1 = np.abs(pot.vp(us) - fd_vp) / (1.0 + np.abs(pot.vp(us)))
    r2 = np.abs(pot.vpp(us) - fd_vpp) / (1.0 + np.abs(pot.vpp(us)))
    return r1, r2
