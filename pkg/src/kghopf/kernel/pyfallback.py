"""Pure-Python monodromy propagation, used when the compiled core is absent.

Implements exactly the algorithm of the Cython kernel: an adaptive
Dormand-Prince 5(4) integration of Hill's equation

    y'' + P(z) y = nu y

over one period [0, T], together with the first- and second-derivative
variational systems in nu, for both canonical initial-condition columns.
P is a piecewise cubic on a uniform grid (coefficient rows [a, b, c, d]
meaning a + b*t + c*t^2 + d*t^3 on each cell).

State layout per column (span = 2*(order+1) entries): y, y', then the
nu-derivative pairs.  Column 0 starts at (1, 0), column 1 at (0, 1).
"""

from __future__ import annotations

import numpy as np

from ._tableau import A, B, C, E

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


def _eval_p(z, h_cell, m, coeffs):
    i = int(z / h_cell)
    if i < 0:
        i = 0
    elif i >= m:
        i = m - 1
    t = z - i * h_cell
    row = coeffs[i]
    return row[0] + t * (row[1] + t * (row[2] + t * row[3]))


def _rhs(z, s, nu, order, h_cell, m, coeffs):
    q = nu - _eval_p(z, h_cell, m, coeffs)
    span = 2 * (order + 1)
    ds = np.empty_like(s)
    for col in (0, 1):
        base = col * span
        for k in range(order + 1):
            i = base + 2 * k
            ds[i] = s[i + 1]
            acc = q * s[i]
            if k == 1:
                acc = acc + s[base]
            elif k == 2:
                acc = acc + 2.0 * s[base + 2]
            ds[i + 1] = acc
    return ds


def _integrate_one(nu, coeffs, h_cell, m, T, order, rtol, atol, max_steps):
    span = 2 * (order + 1)
    n = 2 * span
    dtype = np.complex128 if isinstance(nu, complex) else np.float64
    s = np.zeros(n, dtype=dtype)
    s[0] = 1.0
    s[span + 1] = 1.0

    q0 = abs(nu - _eval_p(0.0, h_cell, m, coeffs))
    h = min(T / 10.0, 0.25 / np.sqrt(1.0 + q0))

    z = 0.0
    k = [None] * 7
    k[0] = _rhs(z, s, nu, order, h_cell, m, coeffs)
    steps = 0
    while z < T:
        if steps >= max_steps:
            return None, steps
        if z + h > T:
            h = T - z
        # stages
        for i in range(1, 7):
            acc = s + h * sum(aij * k[j] for j, aij in enumerate(A[i]) if aij != 0.0)
            k[i] = _rhs(z + C[i] * h, acc, nu, order, h_cell, m, coeffs)
        s_new = s + h * sum(bj * k[j] for j, bj in enumerate(B) if bj != 0.0)
        err_vec = h * sum(ej * k[j] for j, ej in enumerate(E) if ej != 0.0)
        scale = atol + rtol * np.maximum(np.abs(s), np.abs(s_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        steps += 1
        if not np.isfinite(err):
            return None, steps
        if err <= 1.0:
            z = z + h
            s = s_new
            k[0] = k[6]  # FSAL
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, _SAFETY * err ** -0.2)
            h *= factor
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
    return s, steps


def propagate_batch(coeffs, h_cell, T, nus, order, rtol, atol, max_steps=200000):
    """Propagate the augmented Hill system for each value in ``nus``.

    Returns ``(out, steps)`` where ``out[i, k]`` holds
    ``[y1(T), y2(T), y1'(T), y2'(T)]`` for derivative level ``k <= order``
    (unused levels stay zero) and ``steps[i]`` is the accepted+rejected step
    count, or -1 on integrator failure.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    m = coeffs.shape[0]
    nus = np.asarray(nus)
    out = np.zeros((nus.size, 3, 4), dtype=nus.dtype)
    steps = np.zeros(nus.size, dtype=np.int64)
    span = 2 * (order + 1)
    flat = nus.ravel()
    for idx in range(flat.size):
        nu = flat[idx].item()
        s, ns = _integrate_one(nu, coeffs, h_cell, m, float(T), order,
                               rtol, atol, max_steps)
        if s is None:
            steps[idx] = -1
            continue
        steps[idx] = ns
        for k in range(order + 1):
            out[idx, k, 0] = s[2 * k]
            out[idx, k, 1] = s[span + 2 * k]
            out[idx, k, 2] = s[2 * k + 1]
            out[idx, k, 3] = s[span + 2 * k + 1]
    return out, steps
