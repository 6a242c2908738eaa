"""Univariate marginal laws: normal, exponential, chi and Rayleigh."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedKindError
from .intervals import Interval
from .roots import expand_upper, invert_increasing
from .special import (
    ln_gamma,
    reg_lower_inc_gamma,
    std_normal_cdf,
    std_normal_quantile,
)

KINDS = ("normal", "exponential", "chi", "rayleigh")


def _ret(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class Marginal:
    """A univariate law; build it with normal(), exponential(), chi() or rayleigh().

    ``params`` holds (mean, sd) for normal, (rate,) for exponential, (dof,)
    for chi and (scale,) for rayleigh.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKindError(f"unknown marginal kind {self.kind!r}")
        if self.kind == "normal":
            if not self.params[1] > 0:
                raise DomainError("normal sd must be > 0")
        elif self.kind == "chi":
            dof = self.params[0]
            if int(dof) != dof or dof < 1:
                raise DomainError("chi dof must be a positive integer")
        elif not self.params[0] > 0:
            raise DomainError(f"{self.kind} parameter must be > 0")

    @property
    def support(self):
        if self.kind == "normal":
            return Interval.real_line()
        return Interval.right_open(0.0, math.inf)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        if self.kind == "normal":
            mu, sd = self.params
            return _ret(np.asarray(std_normal_cdf((t - mu) / sd)), scalar)
        tp = np.maximum(t, 0.0)
        if self.kind == "exponential":
            out = -np.expm1(-self.params[0] * tp)
        elif self.kind == "rayleigh":
            s = self.params[0]
            out = -np.expm1(-tp * tp / (2.0 * s * s))
        else:
            out = np.asarray(reg_lower_inc_gamma(0.5 * self.params[0], 0.5 * tp * tp))
        return _ret(np.where(t > 0, out, 0.0), scalar)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        if self.kind == "normal":
            mu, sd = self.params
            z = (t - mu) / sd
            return _ret(np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi)), scalar)
        tp = np.maximum(t, 0.0)
        if self.kind == "exponential":
            lam = self.params[0]
            out = lam * np.exp(-lam * tp)
            return _ret(np.where(t >= 0, out, 0.0), scalar)
        if self.kind == "rayleigh":
            s2 = self.params[0] ** 2
            out = tp / s2 * np.exp(-tp * tp / (2.0 * s2))
        else:
            m = self.params[0]
            log_norm = (1.0 - 0.5 * m) * math.log(2.0) - ln_gamma(0.5 * m)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.exp(log_norm + (m - 1) * np.log(tp) - 0.5 * tp * tp)
        return _ret(np.where(t > 0, out, 0.0), scalar)

    def pdf_deriv(self, t):
        """Derivative of the density at interior points of the support."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        f = np.asarray(self.pdf(t))
        if self.kind == "normal":
            mu, sd = self.params
            out = -(t - mu) / (sd * sd) * f
        elif self.kind == "exponential":
            out = -self.params[0] * f
        elif self.kind == "rayleigh":
            out = f * (1.0 / t - t / self.params[0] ** 2)
        else:
            m = self.params[0]
            out = f * ((m - 1) / t - t)
        return _ret(out, scalar)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        scalar = p.ndim == 0
        if np.any(~((p > 0) & (p < 1))):
            raise DomainError(f"quantile requires p in (0, 1), got {p!r}")
        if self.kind == "normal":
            mu, sd = self.params
            out = mu + sd * np.asarray(std_normal_quantile(p))
        elif self.kind == "exponential":
            out = -np.log1p(-p) / self.params[0]
        elif self.kind == "rayleigh":
            out = self.params[0] * np.sqrt(-2.0 * np.log1p(-p))
        else:
            m = self.params[0]
            hi = expand_upper(self.cdf, float(np.max(p)), math.sqrt(m) + 10.0)
            # coarse bisection, then Newton steps kept inside the bracket
            out = invert_increasing(self.cdf, p, 0.0, hi, xtol=1e-6)
            lo_b, hi_b = np.maximum(out - 2e-6 * max(1.0, hi), 0.0), out + 2e-6 * max(1.0, hi)
            for _ in range(4):
                dens = np.asarray(self.pdf(out))
                step = np.where(dens > 0, (np.asarray(self.cdf(out)) - p) / np.where(dens > 0, dens, 1.0), 0.0)
                out = np.clip(out - step, lo_b, hi_b)
        return _ret(out, scalar)

    def __str__(self):
        args = ", ".join(f"{v:g}" for v in self.params)
        return f"{self.kind}({args})"


def normal(mean=0.0, sd=1.0):
    return Marginal("normal", (float(mean), float(sd)))


def exponential(rate):
    return Marginal("exponential", (float(rate),))


def chi(dof):
    if float(dof) != int(dof):
        raise DomainError("chi dof must be a positive integer")
    return Marginal("chi", (int(dof),))


def rayleigh(scale):
    return Marginal("rayleigh", (float(scale),))


def from_dict(d):
    """Build a marginal from {'kind': ..., <parameter names>}."""
    d = dict(d)
    kind = d.pop("kind", None)
    makers = {
        "normal": (normal, {"mean", "sd"}),
        "exponential": (exponential, {"rate"}),
        "chi": (chi, {"dof"}),
        "rayleigh": (rayleigh, {"scale"}),
    }
    if kind not in makers:
        raise UnsupportedKindError(f"unknown marginal kind {kind!r}")
    maker, allowed = makers[kind]
    extra = set(d) - allowed
    if extra:
        raise KeyError(f"unknown keys for {kind} marginal: {sorted(extra)}")
    return maker(**d)


def to_dict(d):
    names = {
        "normal": ("mean", "sd"),
        "exponential": ("rate",),
        "chi": ("dof",),
        "rayleigh": ("scale",),
    }[d.kind]
    return {"kind": d.kind, **dict(zip(names, d.params))}


def concave_alpha_interval(d, alpha):
    """Interval on which the chi(m) cdf is concave-alpha.

    Returns (0, (m - alpha)^(alpha/2)] for alpha < 0, [ln(m)/2, inf) for
    alpha = 0 and [(m - alpha)^(alpha/2), inf) for 0 < alpha <= 1.
    """
    if d.kind != "chi":
        raise UnsupportedKindError("concave_alpha_interval is only known for chi marginals")
    if alpha > 1:
        raise DomainError("alpha must be <= 1")
    m = d.params[0]
    if alpha < 0:
        return Interval.left_open(0.0, (m - alpha) ** (alpha / 2.0))
    if alpha == 0:
        return Interval.right_open(math.log(m) / 2.0, math.inf)
    return Interval.right_open((m - alpha) ** (alpha / 2.0), math.inf)
