"""Copula families, separable chance-constraint probabilities and checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .concavity import ConcavityReport, LAMBDAS
from .errors import DomainError
from .special import std_normal_cdf, std_normal_pdf, std_normal_quantile

KINDS = ("independent", "maximum", "gumbel", "clayton", "gaussian2d")
N_SEGMENTS = 5000


@dataclass(frozen=True)
class Copula:
    kind: str
    dim: int = 2
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown copula {self.kind!r}")
        if self.dim < 1:
            raise DomainError("copula dimension must be positive")
        if self.kind == "gumbel" and not (self.theta is not None and self.theta >= 1):
            raise DomainError("gumbel needs theta >= 1")
        if self.kind == "clayton" and not (self.theta is not None and self.theta > 0):
            raise DomainError("clayton needs theta > 0")
        if self.kind == "gaussian2d":
            if self.dim != 2:
                raise DomainError("gaussian2d is bivariate")
            if not (self.theta is not None and -1 < self.theta < 1):
                raise DomainError("gaussian2d needs a correlation in (-1, 1)")

    def __call__(self, u):
        return copula_eval(self, u)

    def to_dict(self):
        out = {"kind": self.kind, "dim": self.dim}
        if self.theta is not None:
            out["theta"] = self.theta
        return out


def _bvn_lower(h, k, r):
    """P[X <= h, Y <= k] for a standard bivariate normal with correlation r.

    Integrates phi(s) Phi((k - r s)/sqrt(1 - r^2)) over (-inf, h]; the map
    s = h + ln(tau) puts every row on tau in (0, 1] so one adaptive vector
    quadrature serves all rows.
    """
    h, k = np.asarray(h, dtype=float), np.asarray(k, dtype=float)
    sr = math.sqrt(1.0 - r * r)

    def integrand(tau):
        if tau <= 0.0:
            return np.zeros_like(h)
        s = h + math.log(tau)
        return std_normal_pdf(s) * std_normal_cdf((k - r * s) / sr) / tau

    val, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, norm="max")
    return np.clip(val, 0.0, 1.0)


def copula_eval(c, u):
    """C(u) for one point (shape (m,)) or a batch (shape (n, m))."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[1] != c.dim:
        raise DomainError(f"expected {c.dim} coordinates, got {u.shape[1]}")
    if np.any(~((u >= 0) & (u <= 1))):
        raise DomainError("copula arguments must lie in [0, 1]")
    zero = np.any(u == 0.0, axis=1)
    with np.errstate(divide="ignore", over="ignore"):
        if c.kind == "independent":
            out = np.prod(u, axis=1)
        elif c.kind == "maximum":
            out = np.min(u, axis=1)
        elif c.kind == "gumbel":
            s = np.sum((-np.log(u)) ** c.theta, axis=1)
            out = np.exp(-(s ** (1.0 / c.theta)))
        elif c.kind == "clayton":
            s = np.sum(u ** -c.theta, axis=1) - c.dim + 1.0
            out = np.where(zero, 0.0, s ** (-1.0 / c.theta))
        else:
            out = np.min(u, axis=1)
            inner = ~zero & np.all(u < 1.0, axis=1)
            if inner.any():
                z = np.asarray(std_normal_quantile(u[inner]))
                out[inner] = _bvn_lower(z[:, 0], z[:, 1], c.theta)
    out = np.where(zero, 0.0, np.clip(out, 0.0, 1.0))
    return float(out[0]) if single else out


def independent(dim=2):
    return Copula("independent", dim)


def maximum(dim=2):
    return Copula("maximum", dim)


def gumbel(theta, dim=2):
    return Copula("gumbel", dim, float(theta))


def clayton(theta, dim=2):
    return Copula("clayton", dim, float(theta))


def gaussian2d(corr):
    return Copula("gaussian2d", 2, float(corr))


def from_dict(d):
    d = dict(d)
    kind = d.pop("kind")
    dim = int(d.pop("dim", 2))
    theta = d.pop("theta", None)
    if d:
        raise DomainError(f"unknown copula keys {sorted(d)}")
    return Copula(kind, dim, None if theta is None else float(theta))


def separable_prob(h_values, marginals, c):
    """C(F_1(h_1), ..., F_m(h_m))."""
    h_values = np.atleast_1d(np.asarray(h_values, dtype=float))
    if not (h_values.size == len(marginals) == c.dim):
        raise DomainError(
            f"dimension mismatch: {h_values.size} values, {len(marginals)} marginals, copula {c.dim}"
        )
    u = np.array([float(d.cdf(h)) for d, h in zip(marginals, h_values)])
    return copula_eval(c, u)


def check_copula_concave_ginv(c, ghat, region, n=N_SEGMENTS, tol=1e-9, seed=0, lambdas=LAMBDAS):
    """Sampled quasi-concavity of z -> C(G_1^{-1}(z_1), ..., G_m^{-1}(z_m)) on a box."""
    region = np.asarray(region, dtype=float)
    if region.shape != (c.dim, 2) or len(ghat) != c.dim:
        raise DomainError("region must give one (lo, hi) pair per coordinate and transform")
    rng = np.random.default_rng(seed)
    lo, hi = region[:, 0], region[:, 1]
    z1 = rng.uniform(lo, hi, size=(n, c.dim))
    z2 = rng.uniform(lo, hi, size=(n, c.dim))

    def phi(z):
        u = np.column_stack([np.asarray(g.inverse(z[:, i]), dtype=float) for i, g in enumerate(ghat)])
        if np.isnan(u).any():
            raise DomainError("a transform inverse is undefined on the region")
        return copula_eval(c, np.clip(u, 0.0, 1.0))

    floor = np.minimum(phi(z1), phi(z2))
    worst, witness = -math.inf, None
    for lam in lambdas:
        viol = floor - phi(lam * z1 + (1.0 - lam) * z2)
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, witness = float(viol[k]), (z1[k].tolist(), z2[k].tolist(), float(lam))
    names = ",".join(g.name for g in ghat)
    return ConcavityReport(worst <= tol, worst, witness, n * len(lambdas), tol,
                           f"{c.kind} concave-G^-1 [{names}]")
