"""Pure-Python root-refinement kernels.

Mirror of the compiled extension ``mws._kernels._core``: identical operation
order (Neumaier-compensated sums, same branch structure) so both backends
produce the same floating-point results.
"""

from __future__ import annotations

import numpy as np

from mws.errors import BracketError

BACKEND = "pure"

_MAX_EXPAND = 400
_MAX_SECANT = 60


def secular_sum(poles, weights, x: float) -> float:
    """Sum of simple poles sum_j w_j / (x - p_j), compensated."""
    s = 0.0
    c = 0.0
    n = len(poles)
    for j in range(n):
        term = weights[j] / (x - poles[j])
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
    return s + c


def secular_residual(poles, weights, eps0: float, x: float) -> float:
    """f(x) = sum_j w_j/(x - p_j) - x + eps0; strictly decreasing between poles."""
    return secular_sum(poles, weights, x) + (eps0 - x)


def _lo_near_pole(poles, weights, eps0, a, delta0, idx):
    # entering the interval from its left pole a: need f(lo) > 0
    delta = delta0
    while True:
        x = a + delta
        if x > a and secular_residual(poles, weights, eps0, x) > 0.0:
            return x
        delta *= 0.25
        if a + delta <= a:
            raise BracketError(
                f"no representable point with positive residual right of pole {a!r} "
                f"(interval {idx}); weight too small"
            )


def _hi_near_pole(poles, weights, eps0, b, delta0, idx):
    # approaching the interval's right pole b: need f(hi) < 0
    delta = delta0
    while True:
        x = b - delta
        if x < b and secular_residual(poles, weights, eps0, x) < 0.0:
            return x
        delta *= 0.25
        if b - delta >= b:
            raise BracketError(
                f"no representable point with negative residual left of pole {b!r} "
                f"(interval {idx}); weight too small"
            )


def _expand_left(poles, weights, eps0, b, step, idx):
    x = b - step
    for _ in range(_MAX_EXPAND):
        if secular_residual(poles, weights, eps0, x) > 0.0:
            return x
        x = b - 2.0 * (b - x)
        if not np.isfinite(x):
            break
    raise BracketError(f"left expansion failed below pole {b!r} (interval {idx})")


def _expand_right(poles, weights, eps0, a, step, idx):
    x = a + step
    for _ in range(_MAX_EXPAND):
        if secular_residual(poles, weights, eps0, x) < 0.0:
            return x
        x = a + 2.0 * (x - a)
        if not np.isfinite(x):
            break
    raise BracketError(f"right expansion failed above pole {a!r} (interval {idx})")


def _refine(poles, weights, eps0, lo, hi, flo, fhi):
    # bisection to 1e-10 of the initial bracket width, then bracketed secant
    width0 = hi - lo
    target = 1e-10 * width0
    exact = np.nan
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        fm = secular_residual(poles, weights, eps0, mid)
        if fm > 0.0:
            lo, flo = mid, fm
        elif fm < 0.0:
            hi, fhi = mid, fm
        else:
            exact = mid
            break

    if exact == exact:
        return exact, lo, hi, flo, fhi

    x0, f0 = lo, flo
    x1, f1 = hi, fhi
    if abs(f0) < abs(f1):
        best_x, best_f = x0, f0
    else:
        best_x, best_f = x1, f1
    for _ in range(_MAX_SECANT):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo < x2 < hi):
            x2 = 0.5 * (lo + hi)
        if x2 == x1 or x2 == x0 or not (lo < x2 < hi):
            break
        f2 = secular_residual(poles, weights, eps0, x2)
        if abs(f2) < abs(best_f):
            best_x, best_f = x2, f2
        if f2 > 0.0:
            lo, flo = x2, f2
        elif f2 < 0.0:
            hi, fhi = x2, f2
        else:
            best_x, best_f = x2, 0.0
            break
        ftol = 1e-12 * max(1.0, abs(x2), abs(eps0))
        if abs(f2) <= ftol:
            break
        if hi - lo <= 5e-16 * max(abs(lo), abs(hi)):
            break
        x0, f0 = x1, f1
        x1, f1 = x2, f2
    return best_x, lo, hi, flo, fhi


def solve_secular(poles, weights, eps0: float):
    """All P+1 roots of f(x) = sum w_j/(x - p_j) - x + eps0.

    `poles` must be sorted strictly ascending with positive `weights`.
    Returns (roots, bracket_lo, bracket_hi, f_lo, f_hi), each of length P+1,
    with f_lo > 0 > f_hi certifying each bracket.
    """
    p = np.ascontiguousarray(poles, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    npoles = p.shape[0]
    if w.shape[0] != npoles:
        raise ValueError("poles and weights must have equal length")
    if npoles == 0:
        raise ValueError("empty pole table; the single root is eps0 (handle upstream)")

    pl = p.tolist()
    wl = w.tolist()
    spread = pl[-1] - pl[0]
    ref = spread if spread > 1.0 else 1.0

    roots = np.empty(npoles + 1)
    blo = np.empty(npoles + 1)
    bhi = np.empty(npoles + 1)
    flo_arr = np.empty(npoles + 1)
    fhi_arr = np.empty(npoles + 1)

    for i in range(npoles + 1):
        if i == 0:
            b = pl[0]
            hi = _hi_near_pole(pl, wl, eps0, b, 1e-8 * ref, i)
            lo = _expand_left(pl, wl, eps0, b, ref, i)
        elif i == npoles:
            a = pl[npoles - 1]
            lo = _lo_near_pole(pl, wl, eps0, a, 1e-8 * ref, i)
            hi = _expand_right(pl, wl, eps0, a, ref, i)
        else:
            a = pl[i - 1]
            b = pl[i]
            gap = b - a
            lo = _lo_near_pole(pl, wl, eps0, a, 1e-8 * gap, i)
            hi = _hi_near_pole(pl, wl, eps0, b, 1e-8 * gap, i)
        flo = secular_residual(pl, wl, eps0, lo)
        fhi = secular_residual(pl, wl, eps0, hi)
        if not (flo > 0.0 > fhi):
            raise BracketError(f"bracket certificate failed in interval {i}")
        root, lo, hi, flo, fhi = _refine(pl, wl, eps0, lo, hi, flo, fhi)
        roots[i] = root
        blo[i] = lo
        bhi[i] = hi
        flo_arr[i] = flo
        fhi_arr[i] = fhi

    return roots, blo, bhi, flo_arr, fhi_arr
