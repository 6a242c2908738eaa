"""Real intervals with open/closed ends."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @classmethod
    def open(cls, lo, hi):
        return cls(lo, hi, False, False)

    @classmethod
    def left_open(cls, lo, hi):
        return cls(lo, hi, False, True)

    @classmethod
    def right_open(cls, lo, hi):
        return cls(lo, hi, True, False)

    @classmethod
    def real_line(cls):
        return cls(-math.inf, math.inf, False, False)

    def contains(self, t):
        t = np.asarray(t, dtype=float)
        above = t >= self.lo if self.lo_closed else t > self.lo
        below = t <= self.hi if self.hi_closed else t < self.hi
        return above & below

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def inner(self, rel=1e-9):
        """Closed bounds strictly inside the open ends, for sampling."""
        if not self.bounded:
            raise ValueError("cannot sample an unbounded interval; truncate it first")
        pad = rel * max(self.hi - self.lo, abs(self.lo), abs(self.hi), 1e-300)
        lo = self.lo if self.lo_closed else self.lo + pad
        hi = self.hi if self.hi_closed else self.hi - pad
        return lo, hi

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:.10g}, {self.hi:.10g}{right}"
