# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. ``framelab._kernels_py`` mirrors every signature."""

import numpy as np
from libc.math cimport sqrt, fabs


def jacobi_eigh(a_in, double rel_tol=1e-13, int max_sweeps=100):
    """Cyclic Jacobi on a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvectors in
    columns, unsorted.
    """
    a_np = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t d = a_np.shape[0]
    v_np = np.eye(d, dtype=np.float64)
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] v = v_np
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double fro = 0.0, off, apq, theta, t, c, s, akp, akq, thresh
    with nogil:
        for p in range(d):
            for q in range(d):
                fro += a[p, q] * a[p, q]
        fro = sqrt(fro)
        thresh = rel_tol * fro
        while sweep < max_sweeps:
            off = 0.0
            for p in range(d):
                for q in range(d):
                    if p != q:
                        off += a[p, q] * a[p, q]
            if sqrt(off) <= thresh:
                break
            sweep += 1
            for p in range(d - 1):
                for q in range(p + 1, d):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(d):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[k, q] = s * akp + c * akq
                    for k in range(d):
                        akp = a[p, k]
                        akq = a[q, k]
                        a[p, k] = c * akp - s * akq
                        a[q, k] = s * akp + c * akq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(d):
                        akp = v[k, p]
                        akq = v[k, q]
                        v[k, p] = c * akp - s * akq
                        v[k, q] = s * akp + c * akq
    return np.diagonal(a_np).copy(), v_np, sweep


def gram_deviation(const double[:, ::1] x, const double[:, ::1] target,
                   double denom, double[:, ::1] out):
    """``out[i, j] = ((x.T @ x) / denom - target)[i, j] ** 2``; returns the sum."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, dev, total = 0.0
    with nogil:
        for i in range(d):
            for j in range(i, d):
                acc = 0.0
                for k in range(n):
                    acc += x[k, i] * x[k, j]
                dev = acc / denom - target[i, j]
                out[i, j] = dev * dev
                if j != i:
                    dev = acc / denom - target[j, i]
                    out[j, i] = dev * dev
        for i in range(d):
            for j in range(d):
                total += out[i, j]
    return total


def hermitian_gram_deviation(const double[:, ::1] re, const double[:, ::1] im,
                             const double[:, ::1] target, double denom,
                             double[:, ::1] out):
    """Complex analogue of :func:`gram_deviation` for rows ``re + 1j*im``.

    Accumulates ``sum_k z_k z_k^* / denom`` over real pairs; ``target`` is real.
    """
    cdef Py_ssize_t n = re.shape[0], d = re.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double cr, ci, dr, total = 0.0
    with nogil:
        for i in range(d):
            for j in range(i, d):
                cr = 0.0
                ci = 0.0
                for k in range(n):
                    # z_i * conj(z_j)
                    cr += re[k, i] * re[k, j] + im[k, i] * im[k, j]
                    ci += im[k, i] * re[k, j] - re[k, i] * im[k, j]
                dr = cr / denom - target[i, j]
                ci = ci / denom
                out[i, j] = dr * dr + ci * ci
                if j != i:
                    dr = cr / denom - target[j, i]
                    out[j, i] = dr * dr + ci * ci
        for i in range(d):
            for j in range(d):
                total += out[i, j]
    return total
