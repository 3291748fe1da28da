"""Compiled inner loop for running intersections of E_n.

Only balls whose centre lies within r_n of the running set can change it,
so each step looks up those centres in the sorted sample and intersects
the running pieces with the union of their balls.  Length bookkeeping
mirrors :class:`unicover.torus.ArcSet`: a piece that is an untouched copy
of a ball or of a running piece keeps that exact length.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _grow(arr, size):
    out = np.empty(max(2 * arr.size, size), dtype=arr.dtype)
    out[: arr.size] = arr
    return out


@njit(cache=True, nogil=True)
def _flush(out_lo, out_ln, k, p_lo, p_hi, p_ln, run_lo, run_hi, single, width):
    lo = max(p_lo, run_lo)
    hi = min(p_hi, run_hi)
    if hi - lo <= 0.0:
        return out_lo, out_ln, k
    if single and run_lo >= p_lo and run_hi <= p_hi:
        ln = width
    elif p_lo >= run_lo and p_hi <= run_hi:
        ln = p_ln
    else:
        ln = hi - lo
    ln = min(ln, p_ln)
    if single:
        ln = min(ln, width)
    if ln <= 0.0:
        return out_lo, out_ln, k
    if k >= out_lo.size:
        out_lo = _grow(out_lo, k + 1)
        out_ln = _grow(out_ln, k + 1)
    out_lo[k] = lo
    out_ln[k] = ln
    return out_lo, out_ln, k + 1


@njit(cache=True, nogil=True)
def _step(cur_lo, cur_ln, pts, idx, n, rad, gap_tol):
    """Pieces of (running set) & (union of balls B(pts[k], rad) with idx[k] < n)."""
    width = 2.0 * rad
    out_lo = np.empty(cur_lo.size + 16)
    out_ln = np.empty(cur_lo.size + 16)
    k = 0
    for i in range(cur_lo.size):
        p_lo = cur_lo[i]
        p_ln = cur_ln[i]
        p_hi = p_lo + p_ln
        a = p_lo - rad
        b = p_hi + rad
        have = False
        run_lo = 0.0
        run_hi = 0.0
        single = True
        for shift in (-1.0, 0.0, 1.0):
            if shift < 0.0:
                if a >= 0.0:
                    continue
                q_lo, q_hi = a + 1.0, 1.0
            elif shift == 0.0:
                q_lo, q_hi = max(a, 0.0), min(b, 1.0)
            else:
                if b <= 1.0:
                    continue
                q_lo, q_hi = 0.0, b - 1.0
            k0 = np.searchsorted(pts, q_lo, side="left")
            k1 = np.searchsorted(pts, q_hi, side="right")
            for t in range(k0, k1):
                if idx[t] >= n:
                    continue
                c = pts[t] + shift
                b_lo = c - rad
                b_hi = b_lo + width
                if have and b_lo <= run_hi + gap_tol:
                    if b_hi > run_hi:
                        run_hi = b_hi
                    single = False
                else:
                    if have:
                        out_lo, out_ln, k = _flush(out_lo, out_ln, k, p_lo, p_hi, p_ln, run_lo, run_hi, single, width)
                    have = True
                    run_lo = b_lo
                    run_hi = b_hi
                    single = True
        if have:
            out_lo, out_ln, k = _flush(out_lo, out_ln, k, p_lo, p_hi, p_ln, run_lo, run_hi, single, width)
    return out_lo[:k].copy(), out_ln[:k].copy()


@njit(cache=True, nogil=True)
def running_intersection(lo0, ln0, pts, idx, radii, p, checkpoints, gap_tol):
    """Pieces of E_p & E_{p+1} & ... & E_N at each checkpoint N.

    ``pts`` is the sorted sample and ``idx`` the original 0-based index of
    each sorted point; ``radii[n]`` is r_n.  Returns flat piece arrays and
    offsets, one slice per checkpoint.
    """
    n_cp = checkpoints.size
    lows = []
    lens = []
    cur_lo = lo0.copy()
    cur_ln = ln0.copy()
    c = 0
    while c < n_cp and checkpoints[c] <= p:
        lows.append(cur_lo.copy())
        lens.append(cur_ln.copy())
        c += 1
    last = checkpoints[n_cp - 1] if n_cp > 0 else p
    n = p + 1
    while n <= last and c < n_cp:
        rad = radii[n]
        if cur_lo.size > 0 and 2.0 * rad < 1.0:
            cur_lo, cur_ln = _step(cur_lo, cur_ln, pts, idx, n, rad, gap_tol)
        while c < n_cp and checkpoints[c] == n:
            lows.append(cur_lo.copy())
            lens.append(cur_ln.copy())
            c += 1
        n += 1
    offsets = np.zeros(len(lows) + 1, dtype=np.int64)
    for j in range(len(lows)):
        offsets[j + 1] = offsets[j] + lows[j].size
    flat_lo = np.empty(offsets[-1])
    flat_ln = np.empty(offsets[-1])
    for j in range(len(lows)):
        flat_lo[offsets[j] : offsets[j + 1]] = lows[j]
        flat_ln[offsets[j] : offsets[j + 1]] = lens[j]
    return flat_lo, flat_ln, offsets
