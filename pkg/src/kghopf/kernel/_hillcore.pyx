# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled monodromy propagation for Hill's equation.

Mirrors kghopf.kernel.pyfallback exactly: adaptive Dormand-Prince 5(4) on the
augmented system (two canonical columns, up to second nu-derivatives), with
P(z) a piecewise cubic on a uniform grid.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt, pow, fmin, fmax

ctypedef double complex dcomplex

ctypedef fused scalar:
    double
    dcomplex

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

# Dormand-Prince 5(4) tableau (FSAL)
cdef double C2 = 1.0/5.0, C3 = 3.0/10.0, C4 = 4.0/5.0, C5 = 8.0/9.0
cdef double A21 = 1.0/5.0
cdef double A31 = 3.0/40.0, A32 = 9.0/40.0
cdef double A41 = 44.0/45.0, A42 = -56.0/15.0, A43 = 32.0/9.0
cdef double A51 = 19372.0/6561.0, A52 = -25360.0/2187.0
cdef double A53 = 64448.0/6561.0, A54 = -212.0/729.0
cdef double A61 = 9017.0/3168.0, A62 = -355.0/33.0, A63 = 46732.0/5247.0
cdef double A64 = 49.0/176.0, A65 = -5103.0/18656.0
cdef double B1 = 35.0/384.0, B3 = 500.0/1113.0, B4 = 125.0/192.0
cdef double B5 = -2187.0/6784.0, B6 = 11.0/84.0
cdef double E1 = 71.0/57600.0, E3 = -71.0/16695.0, E4 = 71.0/1920.0
cdef double E5 = -17253.0/339200.0, E6 = 22.0/525.0, E7 = -1.0/40.0


cdef inline double eval_p(double z, double h_cell, int m,
                          const double[:, ::1] coeffs) noexcept nogil:
    cdef int i = <int>(z / h_cell)
    if i < 0:
        i = 0
    elif i >= m:
        i = m - 1
    cdef double t = z - i * h_cell
    return coeffs[i, 0] + t * (coeffs[i, 1] + t * (coeffs[i, 2] + t * coeffs[i, 3]))


cdef inline double mag(scalar x) noexcept nogil:
    if scalar is double:
        return fabs(x)
    else:
        return sqrt(x.real * x.real + x.imag * x.imag)


cdef inline void rhs(double z, scalar nu, scalar* s, scalar* ds, int order,
                     double h_cell, int m, const double[:, ::1] coeffs) noexcept nogil:
    cdef double P = eval_p(z, h_cell, m, coeffs)
    cdef scalar q = nu - P
    cdef int span = 2 * (order + 1)
    cdef int col, k, base, i
    for col in range(2):
        base = col * span
        for k in range(order + 1):
            i = base + 2 * k
            ds[i] = s[i + 1]
            if k == 0:
                ds[i + 1] = q * s[i]
            elif k == 1:
                ds[i + 1] = q * s[i] + s[base]
            else:
                ds[i + 1] = q * s[i] + 2.0 * s[base + 2]


cdef long integrate_one(scalar nu, const double[:, ::1] coeffs, double h_cell,
                        int m, double T, int order, double rtol, double atol,
                        long max_steps, scalar* s) noexcept nogil:
    """Integrate one nu value; final state in s (size 2*span). Returns the
    step count, or -1 on failure."""
    cdef int span = 2 * (order + 1)
    cdef int n = 2 * span
    cdef scalar k1[12]
    cdef scalar k2[12]
    cdef scalar k3[12]
    cdef scalar k4[12]
    cdef scalar k5[12]
    cdef scalar k6[12]
    cdef scalar k7[12]
    cdef scalar stage[12]
    cdef scalar s_new[12]
    cdef scalar ev
    cdef int i
    cdef long steps = 0
    cdef double z = 0.0, h, q0, err, sc, r, factor

    for i in range(n):
        s[i] = 0.0
    s[0] = 1.0
    s[span + 1] = 1.0

    q0 = mag(nu - eval_p(0.0, h_cell, m, coeffs))
    h = fmin(T / 10.0, 0.25 / sqrt(1.0 + q0))

    rhs(z, nu, s, k1, order, h_cell, m, coeffs)
    while z < T:
        if steps >= max_steps:
            return -1
        if z + h > T:
            h = T - z

        for i in range(n):
            stage[i] = s[i] + h * (A21 * k1[i])
        rhs(z + C2 * h, nu, stage, k2, order, h_cell, m, coeffs)
        for i in range(n):
            stage[i] = s[i] + h * (A31 * k1[i] + A32 * k2[i])
        rhs(z + C3 * h, nu, stage, k3, order, h_cell, m, coeffs)
        for i in range(n):
            stage[i] = s[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(z + C4 * h, nu, stage, k4, order, h_cell, m, coeffs)
        for i in range(n):
            stage[i] = s[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                   + A54 * k4[i])
        rhs(z + C5 * h, nu, stage, k5, order, h_cell, m, coeffs)
        for i in range(n):
            stage[i] = s[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                   + A64 * k4[i] + A65 * k5[i])
        rhs(z + h, nu, stage, k6, order, h_cell, m, coeffs)
        for i in range(n):
            s_new[i] = s[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                   + B5 * k5[i] + B6 * k6[i])
        rhs(z + h, nu, s_new, k7, order, h_cell, m, coeffs)

        err = 0.0
        for i in range(n):
            ev = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                      + E6 * k6[i] + E7 * k7[i])
            sc = atol + rtol * fmax(mag(s[i]), mag(s_new[i]))
            r = mag(ev) / sc
            err += r * r
        err = sqrt(err / n)
        steps += 1
        if not (err == err):  # NaN
            return -1
        if err <= 1.0:
            z = z + h
            for i in range(n):
                s[i] = s_new[i]
                k1[i] = k7[i]
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = fmin(MAX_FACTOR, SAFETY * pow(err, -0.2))
            h *= factor
        else:
            h *= fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
    return steps


def propagate_batch(coeffs, double h_cell, double T, nus, int order,
                    double rtol, double atol, long max_steps=200000):
    """Propagate the augmented Hill system for each value in ``nus``.

    Same contract as kghopf.kernel.pyfallback.propagate_batch.
    """
    pc = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef int m = pc.shape[0]
    nus = np.asarray(nus)
    if order < 0 or order > 2:
        raise ValueError("order must be 0, 1 or 2")

    steps = np.zeros(nus.size, dtype=np.int64)
    out = np.zeros((nus.size, 3, 4), dtype=nus.dtype)
    if nus.dtype == np.float64:
        _batch_real(np.ascontiguousarray(nus.ravel()), pc, h_cell, m, T,
                    order, rtol, atol, max_steps, out, steps)
    elif nus.dtype == np.complex128:
        _batch_complex(np.ascontiguousarray(nus.ravel()), pc, h_cell, m, T,
                       order, rtol, atol, max_steps, out, steps)
    else:
        raise TypeError(f"unsupported dtype {nus.dtype}")
    return out, steps


def _batch_real(double[::1] nus, const double[:, ::1] pc, double h_cell, int m,
                double T, int order, double rtol, double atol, long max_steps,
                double[:, :, ::1] out, long[::1] steps):
    cdef long idx, ns
    cdef int k, span = 2 * (order + 1)
    cdef double s[12]
    cdef long nn = nus.shape[0]
    with nogil:
        for idx in range(nn):
            ns = integrate_one(nus[idx], pc, h_cell, m, T, order, rtol, atol,
                               max_steps, s)
            steps[idx] = ns
            if ns < 0:
                continue
            for k in range(order + 1):
                out[idx, k, 0] = s[2 * k]
                out[idx, k, 1] = s[span + 2 * k]
                out[idx, k, 2] = s[2 * k + 1]
                out[idx, k, 3] = s[span + 2 * k + 1]


def _batch_complex(dcomplex[::1] nus, const double[:, ::1] pc, double h_cell,
                   int m, double T, int order, double rtol, double atol,
                   long max_steps, dcomplex[:, :, ::1] out, long[::1] steps):
    cdef long idx, ns
    cdef int k, span = 2 * (order + 1)
    cdef dcomplex s[12]
    cdef long nn = nus.shape[0]
    with nogil:
        for idx in range(nn):
            ns = integrate_one(nus[idx], pc, h_cell, m, T, order, rtol, atol,
                               max_steps, s)
            steps[idx] = ns
            if ns < 0:
                continue
            for k in range(order + 1):
                out[idx, k, 0] = s[2 * k]
                out[idx, k, 1] = s[span + 2 * k]
                out[idx, k, 2] = s[2 * k + 1]
                out[idx, k, 3] = s[span + 2 * k + 1]
