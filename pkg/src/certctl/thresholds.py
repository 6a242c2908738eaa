"""Eventual-convexity thresholds p* for elliptical and copula models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .concavity import check_concave_ginv, power
from .distributions import chi
from .errors import CertificationError, DomainError
from .intervals import Interval
from .roots import invert_increasing
from .special import reg_inc_beta, std_normal_cdf

Q_GRID = 512
Q_EDGE = 1e-4


@dataclass
class ThresholdReport:
    p_star: float
    route: str
    t_star: Optional[float] = None
    q_star: Optional[float] = None
    delta_q: Optional[float] = None
    delta_nd: float = 1.0
    p0: float = 0.5
    binding: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_star <= 1.0:
            raise DomainError(f"p* = {self.p_star} is not a probability")

    def to_dict(self):
        out = {
            "route": self.route,
            "p_star": self.p_star,
            "t_star": self.t_star,
            "q_star": self.q_star,
            "delta_q": self.delta_q,
            "delta_nd": self.delta_nd,
            "p0": self.p0,
            "binding": self.binding,
        }
        out.update(self.extra)
        return out


def delta_of_q(m, q, xtol=1e-13):
    """delta in (0, 1) with I_{1 - delta^2}((m-1)/2, 1/2) = 1 - 2q.

    The left side is strictly decreasing in delta, so the root is unique;
    ``q`` may be an array.
    """
    if int(m) != m or m < 2:
        raise DomainError(f"delta_of_q needs an integer m >= 2, got {m}")
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr < 0.5))):
        raise DomainError("q must lie in (0, 1/2)")
    a = 0.5 * (m - 1)

    def minus_lhs(d):
        return -np.asarray(reg_inc_beta(a, 0.5, np.clip(1.0 - d * d, 0.0, 1.0)))

    out = invert_increasing(minus_lhs, -(1.0 - 2.0 * q_arr), 0.0, 1.0, xtol=xtol)
    return float(out) if out.ndim == 0 else out


def _cdf_of(radial):
    return radial.cdf if hasattr(radial, "cdf") else radial


def p_of_t_q(radial, t_star, delta_nd, m, q):
    """(1/2 - q) F_R(delta_nd t* / delta(q)) + 1/2 + q."""
    if delta_nd < 1:
        raise DomainError("delta_nd must be at least 1")
    q_arr = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        r = delta_nd * t_star / np.asarray(delta_of_q(m, q_arr))
    out = (0.5 - q_arr) * np.asarray(_cdf_of(radial)(r)) + 0.5 + q_arr
    return float(out) if out.ndim == 0 else out


def eventual_threshold_elliptical(radial, t_star, m, delta_nd=1.0, p0=0.5, q_grid=Q_GRID):
    """p* = max(p0, min_q p(t*, q)) from a q grid refined by golden section."""
    if not 0.5 <= p0 <= 1.0:
        raise DomainError("p0 must lie in [1/2, 1]")
    grid = np.linspace(Q_EDGE, 0.5 - Q_EDGE, q_grid)
    vals = np.asarray(p_of_t_q(radial, t_star, delta_nd, m, grid))
    k = int(np.argmin(vals))
    q_best, p_best = float(grid[k]), float(vals[k])
    if 0 < k < q_grid - 1 and vals[k] < min(vals[k - 1], vals[k + 1]):
        res = optimize.minimize_scalar(
            lambda q: p_of_t_q(radial, t_star, delta_nd, m, q),
            bracket=(grid[k - 1], grid[k], grid[k + 1]),
            method="golden",
            tol=1e-8,
        )
        if res.fun <= p_best:
            q_best, p_best = float(res.x), float(res.fun)
    p_star = max(p0, p_best)
    binding = "p0" if p0 >= p_best else "p(t*, q)"
    return ThresholdReport(
        p_star,
        "elliptical_q_formula",
        t_star=float(t_star),
        q_star=q_best,
        delta_q=float(delta_of_q(m, q_best)),
        delta_nd=float(delta_nd),
        p0=float(p0),
        binding=binding,
        extra={"p_of_q_min": p_best, "q_grid": q_grid},
    )


def gaussian_refined_threshold(m):
    """p* = Phi(sqrt(m + 3)) for Gaussian laws with quadratic constraints."""
    if int(m) != m or m < 1:
        raise DomainError(f"dimension must be a positive integer, got {m}")
    t = math.sqrt(m + 3)
    return ThresholdReport(float(std_normal_cdf(t)), "gaussian_refined", t_star=t,
                           binding="Phi(sqrt(m + 3))")


def quadratic_tstar(law, scale=1.0, n=2000, tol=1e-9, seed=0):
    """sqrt(m + 3), certified by concavity of F_chi o G_{-3}^{-1} on (0, scale (m+3)^{-3/2}]."""
    if law.generator != "gaussian":
        raise DomainError("the quadratic t* applies to Gaussian laws")
    m = law.dim
    interval = Interval.left_open(0.0, scale * (m + 3) ** -1.5)
    report = check_concave_ginv(chi(m), power(-3), interval, n=n, tol=tol, seed=seed)
    if not report.holds:
        raise CertificationError(
            f"chi({m}) cdf is not concave-(-3) on {interval}", report
        )
    return math.sqrt(m + 3)


def copula_threshold(marginals, b):
    """p* = max_i F_i(b_i)."""
    if len(marginals) != len(b):
        raise DomainError("need one b_i per marginal")
    vals = [float(d.cdf(bi)) for d, bi in zip(marginals, b)]
    i = int(np.argmax(vals))
    return ThresholdReport(
        vals[i],
        "copula_max",
        binding=f"marginal {i}: {marginals[i]} at b={float(b[i]):.6g}",
        extra={"b": [float(v) for v in b], "marginal_values": vals, "argmax": i,
               "p_equal_allowed": True},
    )
