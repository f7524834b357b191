# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Same contract as ``_kernels_py``."""

import numpy as np

NAME = "cython"


def cubic_derivative(const double[:, ::1] phi, double q, double a):
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1], i, j
    cdef double p
    out = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(nx):
        for j in range(ny):
            p = phi[i, j]
            o[i, j] = p * (q * p * p - a)
    return out


def quartic_sum(const double[:, ::1] phi, double q, double a, double c):
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1], i, j
    cdef double p2, acc = 0.0, qq = 0.25 * q, aa = 0.5 * a
    for i in range(nx):
        for j in range(ny):
            p2 = phi[i, j] * phi[i, j]
            acc += p2 * (qq * p2 - aa)
    return acc + c * nx * ny


def spectral_quadratic(const double[:, ::1] sym, const double complex[:, ::1] fh):
    cdef Py_ssize_t nx = fh.shape[0], nh = fh.shape[1], i, j
    cdef double acc = 0.0, edge = 0.0, re, im, w
    for i in range(nx):
        for j in range(nh):
            re = fh[i, j].real
            im = fh[i, j].imag
            w = sym[i, j] * (re * re + im * im)
            if j == 0 or j == nh - 1:
                edge += w
            else:
                acc += w
    return 2.0 * acc + edge


def implicit_update(const double complex[:, ::1] base,
                    const double complex[:, ::1] forcing,
                    const double[:, ::1] gsym, double coef,
                    const double[:, ::1] denom):
    cdef Py_ssize_t nx = base.shape[0], nh = base.shape[1], i, j
    cdef double s, inv
    out = np.empty((nx, nh), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for i in range(nx):
        for j in range(nh):
            s = coef * gsym[i, j]
            inv = 1.0 / denom[i, j]
            o[i, j].real = (base[i, j].real + s * forcing[i, j].real) * inv
            o[i, j].imag = (base[i, j].imag + s * forcing[i, j].imag) * inv
    return out
