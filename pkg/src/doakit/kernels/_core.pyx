# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scan kernels: batched tr{P_A R} and the 1-D projection scan.

Same contract as the numpy fallback.  The Gram factorization here is a
Cholesky with a pivot-ratio guard (min pivot^2 / max pivot^2 < 1e-12 flags
the tuple degenerate), a cheap stand-in for the fallback's exact eigenvalue
rcond test; both agree away from the guard boundary.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, NAN

cnp.import_array()

DEF PIVOT_GUARD = 1e-12
DEF NULL_GUARD = 1e-12


cdef inline void _fill_steering(double omega, int n, int offset,
                                double complex[::1] out) nogil:
    cdef int i
    cdef double phase
    for i in range(n):
        phase = omega * (offset + i)
        out[i] = cos(phase) + 1j * sin(phase)


cdef bint _cholesky(double complex[:, ::1] g, int q) nogil:
    """In-place lower Cholesky of a q x q Hermitian matrix.

    Returns False when a pivot collapses relative to the largest pivot seen,
    which is how rank-deficient candidate tuples are detected.
    """
    cdef int i, j, k
    cdef double complex acc
    cdef double pivot, pmax = 0.0
    for j in range(q):
        acc = g[j, j]
        for k in range(j):
            acc = acc - g[j, k] * g[j, k].conjugate()
        pivot = acc.real
        if pivot > pmax:
            pmax = pivot
        if pivot <= 0.0 or pivot < PIVOT_GUARD * pmax:
            return False
        pivot = sqrt(pivot)
        g[j, j] = pivot
        for i in range(j + 1, q):
            acc = g[i, j]
            for k in range(j):
                acc = acc - g[i, k] * g[j, k].conjugate()
            g[i, j] = acc / pivot
    return True


cdef void _solve_inplace(double complex[:, ::1] l, double complex[:, ::1] b,
                         int q) nogil:
    """Solve (L L^H) X = B in place for B of shape (q, q)."""
    cdef int i, j, k
    cdef double complex acc
    for j in range(q):
        for i in range(q):
            acc = b[i, j]
            for k in range(i):
                acc = acc - l[i, k] * b[k, j]
            b[i, j] = acc / l[i, i]
        for i in range(q - 1, -1, -1):
            acc = b[i, j]
            for k in range(i + 1, q):
                acc = acc - l[k, i].conjugate() * b[k, j]
            b[i, j] = acc / l[i, i]


def batch_objective(r, omegas, int offset=0):
    """tr{P_A R} per candidate tuple; NaN for degenerate tuples."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] r_arr = np.ascontiguousarray(r, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] om = np.ascontiguousarray(np.atleast_2d(omegas), dtype=np.float64)
    cdef int n = r_arr.shape[0]
    cdef Py_ssize_t t_count = om.shape[0]
    cdef int q = om.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(t_count, dtype=np.float64)
    if t_count == 0:
        return out

    cdef double complex[:, ::1] rv = r_arr
    cdef double[:, ::1] omv = om
    cdef double[::1] outv = out

    cdef cnp.ndarray a_buf = np.empty((q, n), dtype=np.complex128)
    cdef cnp.ndarray g_buf = np.empty((q, q), dtype=np.complex128)
    cdef cnp.ndarray w_buf = np.empty((q, n), dtype=np.complex128)
    cdef cnp.ndarray m_buf = np.empty((q, q), dtype=np.complex128)
    cdef double complex[:, ::1] a = a_buf
    cdef double complex[:, ::1] g = g_buf
    cdef double complex[:, ::1] w = w_buf
    cdef double complex[:, ::1] m = m_buf

    cdef Py_ssize_t t
    cdef int i, j, k
    cdef double complex acc
    cdef double total

    with nogil:
        for t in range(t_count):
            for i in range(q):
                _fill_steering(omv[t, i], n, offset, a[i])
            # Gram G = A^H A laid out as g[p, s] = <a_p, a_s>
            for i in range(q):
                for j in range(i + 1):
                    acc = 0
                    for k in range(n):
                        acc = acc + a[i, k].conjugate() * a[j, k]
                    g[i, j] = acc
                    if i != j:
                        g[j, i] = acc.conjugate()
            if not _cholesky(g, q):
                outv[t] = NAN
                continue
            # W = A R  (rows w_p = a_p^H R as conjugated products folded in M)
            for i in range(q):
                for j in range(n):
                    acc = 0
                    for k in range(n):
                        acc = acc + a[i, k].conjugate() * rv[k, j]
                    w[i, j] = acc
            # M = (A^H R) A
            for i in range(q):
                for j in range(q):
                    acc = 0
                    for k in range(n):
                        acc = acc + w[i, k] * a[j, k]
                    m[i, j] = acc
            _solve_inplace(g, m, q)
            total = 0.0
            for i in range(q):
                total += m[i, i].real
            outv[t] = total
    return out


def scan_objective(r, omega_fixed, omega_grid, int offset=0):
    """b^H R b over a frequency grid against a fixed manifold."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] r_arr = np.ascontiguousarray(r, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fixed = np.ascontiguousarray(np.ravel(omega_fixed), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grid = np.ascontiguousarray(np.ravel(omega_grid), dtype=np.float64)
    cdef int n = r_arr.shape[0]
    cdef int qf = fixed.shape[0]
    cdef Py_ssize_t g_count = grid.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(g_count, dtype=np.float64)
    if g_count == 0:
        return out

    # Construct the orthogonal-complement projector once, in numpy: this is
    # O(n^3) against an O(G n^2) scan so it is not worth hand-rolling.
    if qf > 0:
        idx = offset + np.arange(n)
        a_fixed = np.exp(1j * np.outer(np.asarray(fixed), idx)).T
        gram = a_fixed.conj().T @ a_fixed
        eigvals = np.linalg.eigvalsh(gram)
        if eigvals[0] <= 0 or eigvals[0] / eigvals[-1] < PIVOT_GUARD:
            out[:] = NAN
            return out
        complement = np.eye(n) - a_fixed @ np.linalg.solve(gram, a_fixed.conj().T)
    else:
        complement = np.eye(n, dtype=np.complex128)

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] p_arr = np.ascontiguousarray(complement, dtype=np.complex128)
    cdef double complex[:, ::1] pv = p_arr
    cdef double complex[:, ::1] rv = r_arr
    cdef double[::1] gv = grid
    cdef double[::1] outv = out

    cdef cnp.ndarray a_buf = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray c_buf = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] a = a_buf
    cdef double complex[::1] c = c_buf

    cdef Py_ssize_t gidx
    cdef int i, k
    cdef double complex acc
    cdef double norm_sq, quad

    with nogil:
        for gidx in range(g_count):
            _fill_steering(gv[gidx], n, offset, a)
            norm_sq = 0.0
            for i in range(n):
                acc = 0
                for k in range(n):
                    acc = acc + pv[i, k] * a[k]
                c[i] = acc
                norm_sq += acc.real * acc.real + acc.imag * acc.imag
            if norm_sq < NULL_GUARD * n:
                outv[gidx] = NAN
                continue
            quad = 0.0
            for i in range(n):
                acc = 0
                for k in range(n):
                    acc = acc + rv[i, k] * c[k]
                quad += (c[i].conjugate() * acc).real
            outv[gidx] = quad / norm_sq
    return out
