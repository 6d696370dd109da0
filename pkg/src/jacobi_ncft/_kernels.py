"""Compiled inner loops: Sturm counts, scaled three-term recurrences, bisection drivers."""
import numpy as np
from numba import njit

# rescale threshold for forward recurrences, and its exponent
_BIG = 2.0 ** 100
_SMALL = 2.0 ** -100
_STEP = 100


@njit(cache=True)
def sturm_count(diag, offsq, t, pivmin):
    """Number of eigenvalues of the tridiagonal matrix strictly below ``t``."""
    count = 0
    d = diag[0] - t
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        d = (diag[i] - t) - offsq[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count


@njit(cache=True)
def _sturm_sweep(diag, offsq, shifts, pivmin, d, count):
    """Sturm counts at every shift in one pass; inner loop is across shifts."""
    m = shifts.shape[0]
    for k in range(m):
        x = diag[0] - shifts[k]
        x = x if abs(x) >= pivmin else -pivmin
        d[k] = x
        count[k] = 1 if x < 0.0 else 0
    for i in range(1, diag.shape[0]):
        c = diag[i]
        e2 = offsq[i - 1]
        for k in range(m):
            x = (c - shifts[k]) - e2 / d[k]
            x = x if abs(x) >= pivmin else -pivmin
            d[k] = x
            count[k] += 1 if x < 0.0 else 0


@njit(cache=True)
def sturm_bisect_all(diag, offsq, lo, hi, tol, pivmin):
    """All eigenvalues by simultaneous Sturm-count bisection.

    One sweep over a uniform grid of n shifts seeds every bracket, then each
    sweep halves all brackets at once.
    """
    n = diag.shape[0]
    d = np.empty(n)
    count = np.empty(n, dtype=np.int64)
    a = np.full(n, lo)
    b = np.full(n, hi)
    if n > 1:
        grid = np.empty(n)
        h = (hi - lo) / (n + 1)
        for j in range(n):
            grid[j] = lo + (j + 1) * h
        _sturm_sweep(diag, offsq, grid, pivmin, d, count)
        # count is nondecreasing along the grid
        for j in range(n):
            c = count[j]
            for k in range(c, n):
                if grid[j] > a[k]:
                    a[k] = grid[j]
            for k in range(c):
                if grid[j] < b[k]:
                    b[k] = grid[j]
    mid = np.empty(n)
    while True:
        done = True
        for k in range(n):
            mid[k] = 0.5 * (a[k] + b[k])
            if b[k] - a[k] > tol and a[k] < mid[k] < b[k]:
                done = False
        if done:
            break
        _sturm_sweep(diag, offsq, mid, pivmin, d, count)
        for k in range(n):
            if b[k] - a[k] > tol and a[k] < mid[k] < b[k]:
                if count[k] > k:
                    b[k] = mid[k]
                else:
                    a[k] = mid[k]
    return mid


@njit(cache=True)
def recurrence_scaled(a, b, n, t, vals, exps):
    """Fill P_0..P_n at ``t`` as mantissa/exponent pairs; returns nothing."""
    p_prev = 0.0
    p = 1.0
    e = 0
    vals[0] = 1.0
    exps[0] = 0
    for k in range(n):
        a_prev = a[k - 1] if k > 0 else 0.0
        p_next = ((t - b[k]) * p - a_prev * p_prev) / a[k]
        p_prev = p
        p = p_next
        if abs(p) > _BIG:
            p *= _SMALL
            p_prev *= _SMALL
            e += _STEP
        elif abs(p) < _SMALL and abs(p_prev) < _SMALL and (p != 0.0 or p_prev != 0.0):
            p *= _BIG
            p_prev *= _BIG
            e -= _STEP
        vals[k + 1] = p
        exps[k + 1] = e


@njit(cache=True)
def recurrence_sign(a, b, n, t):
    """Sign of P_n(t) (-1, 0, +1) from the overflow-guarded forward recurrence."""
    p_prev = 0.0
    p = 1.0
    for k in range(n):
        a_prev = a[k - 1] if k > 0 else 0.0
        p_next = ((t - b[k]) * p - a_prev * p_prev) / a[k]
        p_prev = p
        p = p_next
        if abs(p) > _BIG:
            p *= _SMALL
            p_prev *= _SMALL
        elif abs(p) < _SMALL and abs(p_prev) < _SMALL and (p != 0.0 or p_prev != 0.0):
            p *= _BIG
            p_prev *= _BIG
    if p > 0.0:
        return 1
    if p < 0.0:
        return -1
    return 0


@njit(cache=True)
def _repair(a, b, n, x, left, right, want, tol):
    """Nearest point to ``x`` (doubling steps either way) where sign(P_n) == want."""
    step = tol
    limit = 0.5 * min(x - left, right - x)
    while step <= limit:
        if recurrence_sign(a, b, n, x - step) == want:
            return x - step, True
        if recurrence_sign(a, b, n, x + step) == want:
            return x + step, True
        step *= 2.0
    return x, False


@njit(cache=True)
def zero_level(a, b, n, brackets, tol):
    """Bisect for one zero of P_n inside each consecutive pair of ``brackets``.

    ``brackets`` holds the zeros of P_{n-1} padded by the search interval.
    In exact arithmetic P_n has sign (-1)^(n-k) at the k-th of them.  A
    computed zero showing the wrong sign lies within rounding of a zero of
    P_n (the two levels nearly share a zero) and is moved to the nearest
    point with the right sign before bisection.

    Returns (zeros, status) with status -1 on success, otherwise the index of
    the first bracket without a sign change.
    """
    ends = brackets.copy()
    for k in range(1, n):
        want = 1 if (n - k) % 2 == 0 else -1
        if recurrence_sign(a, b, n, ends[k]) != want:
            ends[k], ok = _repair(a, b, n, ends[k], ends[k - 1], brackets[k + 1], want, tol)
            if not ok:
                return np.empty(n), k - 1
    out = np.empty(n)
    for j in range(n):
        lo = ends[j]
        hi = ends[j + 1]
        s_lo = recurrence_sign(a, b, n, lo)
        s_hi = recurrence_sign(a, b, n, hi)
        if s_lo == 0:
            out[j] = lo
            continue
        if s_hi == 0:
            out[j] = hi
            continue
        if s_lo == s_hi:
            return out, j
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            s = recurrence_sign(a, b, n, mid)
            if s == 0:
                lo = mid
                hi = mid
                break
            if s == s_lo:
                lo = mid
            else:
                hi = mid
        out[j] = 0.5 * (lo + hi)
    return out, -1
