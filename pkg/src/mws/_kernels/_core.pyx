# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled root-refinement kernels.

Exact mirror of ``mws._kernels._pure``: same operation order and branch
structure so the two backends agree bit for bit.  Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, NAN

from mws.errors import BracketError

cnp.import_array()

BACKEND = "compiled"

cdef int _MAX_EXPAND = 400
cdef int _MAX_SECANT = 60


cdef double _sum(const double* p, const double* w, Py_ssize_t n, double x) noexcept nogil:
    cdef double s = 0.0
    cdef double c = 0.0
    cdef double term, t
    cdef Py_ssize_t j
    for j in range(n):
        term = w[j] / (x - p[j])
        t = s + term
        if fabs(s) >= fabs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
    return s + c


cdef double _f(const double* p, const double* w, Py_ssize_t n, double eps0, double x) noexcept nogil:
    return _sum(p, w, n, x) + (eps0 - x)


def secular_sum(poles, weights, double x):
    """Sum of simple poles sum_j w_j / (x - p_j), compensated."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(poles, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape[0] != p.shape[0]:
        raise ValueError("poles and weights must have equal length")
    return _sum(&p[0], &w[0], p.shape[0], x)


def secular_residual(poles, weights, double eps0, double x):
    """f(x) = sum_j w_j/(x - p_j) - x + eps0; strictly decreasing between poles."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(poles, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.shape[0] != p.shape[0]:
        raise ValueError("poles and weights must have equal length")
    return _f(&p[0], &w[0], p.shape[0], eps0, x)


cdef double _lo_near_pole(const double* p, const double* w, Py_ssize_t n,
                          double eps0, double a, double delta0, Py_ssize_t idx) except? -1e308:
    cdef double delta = delta0
    cdef double x
    while True:
        x = a + delta
        if x > a and _f(p, w, n, eps0, x) > 0.0:
            return x
        delta *= 0.25
        if a + delta <= a:
            raise BracketError(
                f"no representable point with positive residual right of pole {a!r} "
                f"(interval {idx}); weight too small"
            )


cdef double _hi_near_pole(const double* p, const double* w, Py_ssize_t n,
                          double eps0, double b, double delta0, Py_ssize_t idx) except? -1e308:
    cdef double delta = delta0
    cdef double x
    while True:
        x = b - delta
        if x < b and _f(p, w, n, eps0, x) < 0.0:
            return x
        delta *= 0.25
        if b - delta >= b:
            raise BracketError(
                f"no representable point with negative residual left of pole {b!r} "
                f"(interval {idx}); weight too small"
            )


cdef double _expand_left(const double* p, const double* w, Py_ssize_t n,
                         double eps0, double b, double step, Py_ssize_t idx) except? -1e308:
    cdef double x = b - step
    cdef int it
    for it in range(_MAX_EXPAND):
        if _f(p, w, n, eps0, x) > 0.0:
            return x
        x = b - 2.0 * (b - x)
        if not isfinite(x):
            break
    raise BracketError(f"left expansion failed below pole {b!r} (interval {idx})")


cdef double _expand_right(const double* p, const double* w, Py_ssize_t n,
                          double eps0, double a, double step, Py_ssize_t idx) except? -1e308:
    cdef double x = a + step
    cdef int it
    for it in range(_MAX_EXPAND):
        if _f(p, w, n, eps0, x) < 0.0:
            return x
        x = a + 2.0 * (x - a)
        if not isfinite(x):
            break
    raise BracketError(f"right expansion failed above pole {a!r} (interval {idx})")


cdef void _refine(const double* p, const double* w, Py_ssize_t n, double eps0,
                  double lo, double hi, double flo, double fhi,
                  double* out) noexcept nogil:
    cdef double width0 = hi - lo
    cdef double target = 1e-10 * width0
    cdef double exact = NAN
    cdef double mid, fm
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        fm = _f(p, w, n, eps0, mid)
        if fm > 0.0:
            lo = mid
            flo = fm
        elif fm < 0.0:
            hi = mid
            fhi = fm
        else:
            exact = mid
            break

    cdef double x0, f0, x1, f1, x2, f2, best_x, best_f, ftol, m
    cdef int it
    if exact == exact:
        out[0] = exact
        out[1] = lo
        out[2] = hi
        out[3] = flo
        out[4] = fhi
        return

    x0 = lo
    f0 = flo
    x1 = hi
    f1 = fhi
    if fabs(f0) < fabs(f1):
        best_x = x0
        best_f = f0
    else:
        best_x = x1
        best_f = f1
    for it in range(_MAX_SECANT):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo < x2 < hi):
            x2 = 0.5 * (lo + hi)
        if x2 == x1 or x2 == x0 or not (lo < x2 < hi):
            break
        f2 = _f(p, w, n, eps0, x2)
        if fabs(f2) < fabs(best_f):
            best_x = x2
            best_f = f2
        if f2 > 0.0:
            lo = x2
            flo = f2
        elif f2 < 0.0:
            hi = x2
            fhi = f2
        else:
            best_x = x2
            best_f = 0.0
            break
        ftol = 1e-12 * max(1.0, max(fabs(x2), fabs(eps0)))
        if fabs(f2) <= ftol:
            break
        m = max(fabs(lo), fabs(hi))
        if hi - lo <= 5e-16 * m:
            break
        x0 = x1
        f0 = f1
        x1 = x2
        f1 = f2
    out[0] = best_x
    out[1] = lo
    out[2] = hi
    out[3] = flo
    out[4] = fhi


def solve_secular(poles, weights, double eps0):
    """All P+1 roots of f(x) = sum w_j/(x - p_j) - x + eps0.

    `poles` must be sorted strictly ascending with positive `weights`.
    Returns (roots, bracket_lo, bracket_hi, f_lo, f_hi), each of length P+1,
    with f_lo > 0 > f_hi certifying each bracket.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(poles, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t npoles = p.shape[0]
    if w.shape[0] != npoles:
        raise ValueError("poles and weights must have equal length")
    if npoles == 0:
        raise ValueError("empty pole table; the single root is eps0 (handle upstream)")

    cdef const double* pp = &p[0]
    cdef const double* ww = &w[0]
    cdef double spread = pp[npoles - 1] - pp[0]
    cdef double ref = spread if spread > 1.0 else 1.0

    cdef cnp.ndarray[cnp.float64_t, ndim=1] roots = np.empty(npoles + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] blo = np.empty(npoles + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bhi = np.empty(npoles + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flo_arr = np.empty(npoles + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fhi_arr = np.empty(npoles + 1)

    cdef Py_ssize_t i
    cdef double a, b, gap, lo, hi, flo, fhi
    cdef double out[5]
    for i in range(npoles + 1):
        if i == 0:
            b = pp[0]
            hi = _hi_near_pole(pp, ww, npoles, eps0, b, 1e-8 * ref, i)
            lo = _expand_left(pp, ww, npoles, eps0, b, ref, i)
        elif i == npoles:
            a = pp[npoles - 1]
            lo = _lo_near_pole(pp, ww, npoles, eps0, a, 1e-8 * ref, i)
            hi = _expand_right(pp, ww, npoles, eps0, a, ref, i)
        else:
            a = pp[i - 1]
            b = pp[i]
            gap = b - a
            lo = _lo_near_pole(pp, ww, npoles, eps0, a, 1e-8 * gap, i)
            hi = _hi_near_pole(pp, ww, npoles, eps0, b, 1e-8 * gap, i)
        flo = _f(pp, ww, npoles, eps0, lo)
        fhi = _f(pp, ww, npoles, eps0, hi)
        if not (flo > 0.0 > fhi):
            raise BracketError(f"bracket certificate failed in interval {i}")
        _refine(pp, ww, npoles, eps0, lo, hi, flo, fhi, out)
        roots[i] = out[0]
        blo[i] = out[1]
        bhi[i] = out[2]
        flo_arr[i] = out[3]
        fhi_arr[i] = out[4]

    return roots, blo, bhi, flo_arr, fhi_arr
