"""Bracketing and bisection, scalar and vectorized."""

from __future__ import annotations

import numpy as np

from .errors import BracketError


def bisect(f, lo, hi, xtol=1e-12, max_iter=300):
    """Root of a scalar function on [lo, hi] by plain bisection.

    Raises BracketError if f(lo) and f(hi) have the same strict sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f(lo)={flo:.3g}, f(hi)={fhi:.3g}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expand_upper(f, target, start, grow=2.0, limit=1e300):
    """Smallest start*grow**k with f(.) >= target, for nondecreasing f."""
    hi = start
    while f(hi) < target:
        hi *= grow
        if hi > limit:
            raise BracketError(f"could not bracket target {target!r} below {limit:g}")
    return hi


def invert_increasing(f, targets, lo, hi, xtol=1e-12, max_iter=200):
    """Solve f(t) = target elementwise for a nondecreasing vectorized f.

    lo and hi must bracket every target (f(lo) <= target <= f(hi)); they may be
    scalars or arrays broadcastable against targets.
    """
    targets = np.asarray(targets, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    for _ in range(max_iter):
        width = hi - lo
        if np.all(width <= xtol * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        below = f(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sign_changes(values):
    """Indices i where values[i] and values[i+1] differ in strict sign.

    Exact zeros are skipped over so that a touch-zero is not double counted.
    """
    s = np.sign(np.asarray(values, dtype=float))
    idx = np.flatnonzero(s != 0)
    if idx.size < 2:
        return []
    flips = np.flatnonzero(s[idx[1:]] != s[idx[:-1]])
    return [int(idx[k]) for k in flips]

