# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled cone kernels: same API and semantics as _kernels_py, with the
per-block work done in C loops instead of segmented numpy calls."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BIG_STEP = 1e20


class ScalingError(RuntimeError):
    """Raised when an iterate leaves the cone interior."""


def scaling(double[::1] s, double[::1] z, lay):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int m = lay.m
    cdef int i, k, j, st, d
    cdef double a_s, a_z, rs, rz, dot, gamma, s0b, z0b, w0, c, dd

    w_nn_a = np.empty(l)
    eta_a = np.empty(nsoc)
    wbar_a = np.empty(m - l)
    lam_a = np.empty(m)
    cdef double[::1] w_nn = w_nn_a
    cdef double[::1] eta = eta_a
    cdef double[::1] wbar = wbar_a
    cdef double[::1] lam = lam_a

    for i in range(l):
        if s[i] <= 0.0 or z[i] <= 0.0:
            raise ScalingError("point left the cone interior")
        w_nn[i] = sqrt(s[i] / z[i])
        lam[i] = sqrt(s[i] * z[i])

    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        a_s = 0.0
        a_z = 0.0
        for j in range(1, d):
            a_s += s[st + j] * s[st + j]
            a_z += z[st + j] * z[st + j]
        a_s = s[st] * s[st] - a_s
        a_z = z[st] * z[st] - a_z
        if a_s <= 0.0 or a_z <= 0.0:
            raise ScalingError("point left the cone interior")
        rs = sqrt(a_s)
        rz = sqrt(a_z)
        dot = 0.0
        for j in range(d):
            dot += (s[st + j] / rs) * (z[st + j] / rz)
        gamma = sqrt((1.0 + dot) / 2.0)
        s0b = s[st] / rs
        z0b = z[st] / rz
        wbar[st - l] = (s0b + z0b) / (2.0 * gamma)
        for j in range(1, d):
            wbar[st - l + j] = (s[st + j] / rs - z[st + j] / rz) / (2.0 * gamma)
        eta[k] = (a_s / a_z) ** 0.25

        # lam = eta * T(wbar) z
        w0 = wbar[st - l]
        c = 0.0
        for j in range(d):
            c += wbar[st - l + j] * z[st + j]
        dd = z[st] + (c - w0 * z[st]) / (1.0 + w0)
        lam[st] = eta[k] * c
        for j in range(1, d):
            lam[st + j] = eta[k] * (z[st + j] + dd * wbar[st - l + j])

    return w_nn_a, eta_a, wbar_a, lam_a


def apply_w(double[::1] w_nn, double[::1] eta, double[::1] wbar,
            double[::1] x, lay, bint inv=False):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double c, w0, dd, e

    out_a = np.empty(lay.m)
    cdef double[::1] out = out_a
    if inv:
        for i in range(l):
            out[i] = x[i] / w_nn[i]
    else:
        for i in range(l):
            out[i] = x[i] * w_nn[i]

    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        w0 = wbar[st - l]
        c = 0.0
        for j in range(d):
            c += wbar[st - l + j] * x[st + j]
        if inv:
            c = 2.0 * w0 * x[st] - c
        dd = x[st] + (c - w0 * x[st]) / (1.0 + w0)
        e = eta[k]
        if inv:
            out[st] = c / e
            for j in range(1, d):
                out[st + j] = (x[st + j] - dd * wbar[st - l + j]) / e
        else:
            out[st] = c * e
            for j in range(1, d):
                out[st + j] = (x[st + j] + dd * wbar[st - l + j]) * e
    return out_a


def apply_w2(double[::1] w_nn, double[::1] eta, double[::1] wbar,
             double[::1] x, lay, bint inv=False):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double c, w0, e2

    out_a = np.empty(lay.m)
    cdef double[::1] out = out_a
    for i in range(l):
        if inv:
            out[i] = x[i] / (w_nn[i] * w_nn[i])
        else:
            out[i] = x[i] * (w_nn[i] * w_nn[i])

    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        w0 = wbar[st - l]
        c = 0.0
        for j in range(d):
            c += wbar[st - l + j] * x[st + j]
        e2 = eta[k] * eta[k]
        if inv:
            c = 2.0 * w0 * x[st] - c
            out[st] = (2.0 * w0 * c - x[st]) / e2
            for j in range(1, d):
                out[st + j] = (x[st + j] - 2.0 * c * wbar[st - l + j]) / e2
        else:
            out[st] = (2.0 * w0 * c - x[st]) * e2
            for j in range(1, d):
                out[st + j] = (x[st + j] + 2.0 * c * wbar[st - l + j]) * e2
    return out_a


def jmul(double[::1] u, double[::1] v, lay):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double dot, u0, v0

    out_a = np.empty(lay.m)
    cdef double[::1] out = out_a
    for i in range(l):
        out[i] = u[i] * v[i]
    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        u0 = u[st]
        v0 = v[st]
        dot = 0.0
        for j in range(d):
            dot += u[st + j] * v[st + j]
        for j in range(1, d):
            out[st + j] = u0 * v[st + j] + v0 * u[st + j]
        out[st] = dot
    return out_a


def jsolve(double[::1] lam, double[::1] r, lay):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double det, dotj, u0, l0

    out_a = np.empty(lay.m)
    cdef double[::1] out = out_a
    for i in range(l):
        out[i] = r[i] / lam[i]
    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        l0 = lam[st]
        det = 0.0
        dotj = 0.0
        for j in range(1, d):
            det += lam[st + j] * lam[st + j]
            dotj += lam[st + j] * r[st + j]
        det = l0 * l0 - det
        dotj = l0 * r[st] - dotj
        u0 = dotj / det
        out[st] = u0
        for j in range(1, d):
            out[st + j] = (r[st + j] - u0 * lam[st + j]) / l0
    return out_a


def max_step(double[::1] x, double[::1] dx, lay):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double alpha = BIG_STEP
    cdef double a, b, c, disc, sq, q, r1, r2, cand

    for i in range(l):
        if dx[i] < 0.0:
            cand = -x[i] / dx[i]
            if cand < alpha:
                alpha = cand

    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        a = 0.0
        b = 0.0
        c = 0.0
        for j in range(1, d):
            a += dx[st + j] * dx[st + j]
            b += x[st + j] * dx[st + j]
            c += x[st + j] * x[st + j]
        a = dx[st] * dx[st] - a
        b = 2.0 * (x[st] * dx[st] - b)
        c = x[st] * x[st] - c
        if c < 0.0:
            c = 0.0
        cand = BIG_STEP
        if a == 0.0:
            if b < 0.0:
                cand = -c / b
        else:
            disc = b * b - 4.0 * a * c
            if disc >= 0.0:
                sq = sqrt(disc)
                if b >= 0.0:
                    q = -(b + sq) / 2.0
                else:
                    q = -(b - sq) / 2.0
                cand = BIG_STEP
                if a != 0.0:
                    r1 = q / a
                    if r1 >= 0.0 and r1 < cand:
                        cand = r1
                if q != 0.0:
                    r2 = c / q
                    if r2 >= 0.0 and r2 < cand:
                        cand = r2
        if cand < alpha:
            alpha = cand
    return alpha


def min_margin(double[::1] x, lay):
    cdef int l = lay.l
    cdef int[::1] starts = lay.starts
    cdef int[::1] dims = lay.dims
    cdef int nsoc = lay.nsoc
    cdef int i, k, j, st, d
    cdef double margin = np.inf
    cdef double t, v

    for i in range(l):
        if x[i] < margin:
            margin = x[i]
    for k in range(nsoc):
        st = starts[k]
        d = dims[k]
        t = 0.0
        for j in range(1, d):
            t += x[st + j] * x[st + j]
        v = x[st] - sqrt(t)
        if v < margin:
            margin = v
    return margin
