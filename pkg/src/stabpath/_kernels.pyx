# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_kernels_py``; identical semantics."""
from libc.math cimport fabs, floor, ceil, fmod, M_PI

cdef double TWO_PI = 2.0 * M_PI


cpdef double wrap_angle(double x):
    cdef double y = fmod(x + M_PI, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - M_PI


def unwrap_increments(double[:] arg_w, double[:] arg_mid, double[:] d_im_s, double[:] out):
    cdef Py_ssize_t n = arg_w.shape[0]
    cdef Py_ssize_t j
    cdef double d, d2
    for j in range(n - 1):
        d = wrap_angle(arg_w[j + 1] - arg_w[j])
        d2 = wrap_angle(arg_mid[j] - arg_w[j]) + wrap_angle(arg_w[j + 1] - arg_mid[j])
        if fabs(d - d2) > 1e-9 or fabs(d) >= M_PI * (1.0 - 1e-12):
            return j
        out[j] = d_im_s[j] + d
    return -1


def shift_gap(double[:] psi_i, double[:] psi_j, double r, double eps):
    cdef Py_ssize_t k
    cdef long a, b
    cdef long min_a = 0
    cdef long max_b = 0
    cdef bint first = True
    for k in range(psi_i.shape[0]):
        if eps > 0.0:
            a = <long>floor(-eps - r - psi_i[k]) + 1
        else:
            a = <long>ceil(-r - psi_i[k])
        if first or a < min_a:
            min_a = a
            first = False
    first = True
    for k in range(psi_j.shape[0]):
        if eps > 0.0:
            b = <long>ceil(1.0 + eps + r - psi_j[k]) - 1
        else:
            b = <long>floor(1.0 + r - psi_j[k])
        if first or b > max_b:
            max_b = b
            first = False
    return max_b - min_a


def slice_distance(double[:] pa, double[:] pb, int max_shift):
    cdef Py_ssize_t n = pa.shape[0]
    cdef Py_ssize_t k, l
    cdef int delta
    cdef double best = 0.0
    cdef double d, a1, b1, hi_a, hi_b, lo_a, lo_b
    for k in range(n):
        d = fabs(pa[k] - pb[k])
        if d > best:
            best = d
    for k in range(n):
        for l in range(k + 1, n):
            for delta in range(-2 * max_shift, 2 * max_shift + 1):
                a1 = pa[k] + delta
                b1 = pb[k] + delta
                hi_a = a1 if a1 > pa[l] else pa[l]
                hi_b = b1 if b1 > pb[l] else pb[l]
                lo_a = pa[l] if a1 > pa[l] else a1
                lo_b = pb[l] if b1 > pb[l] else b1
                d = fabs(hi_a - hi_b)
                if d > best:
                    best = d
                d = fabs(lo_a - lo_b)
                if d > best:
                    best = d
    return best
