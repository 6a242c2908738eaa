"""Elliptical laws via the spherical-radial decomposition xi = mu + R L zeta."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .distributions import chi
from .errors import DomainError, NotPositiveDefiniteError, RepresentationError
from .roots import expand_upper, invert_increasing

N_KNOTS = 4096
DEFAULT_MC_POINTS = 20000
DEFAULT_ANGLE_POINTS = 720


def cholesky(a):
    """Lower Cholesky factor of a symmetric matrix.

    Raises NotPositiveDefiniteError naming the first non-positive pivot.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"covariance must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise DomainError("covariance must be symmetric")
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        piv = a[j, j] - low[j, :j] @ low[j, :j]
        if not piv > 0.0:
            raise NotPositiveDefiniteError(j, float(piv))
        low[j, j] = math.sqrt(piv)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def _monotone_hermite(x, y, slope):
    """Cubic Hermite interpolant with exact slopes, kept monotone.

    Slopes violating the Fritsch-Carlson bound fall back to the PCHIP ones.
    """
    secant = np.diff(y) / np.diff(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        a, b = slope[:-1] / secant, slope[1:] / secant
    bad = ~(a * a + b * b <= 9.0)
    if bad.any():
        fallback = PchipInterpolator(x, y).derivative()(x)
        idx = np.flatnonzero(bad)
        slope = slope.copy()
        slope[idx] = fallback[idx]
        slope[idx + 1] = fallback[idx + 1]
    return CubicHermiteSpline(x, y, slope)


class StudentRadial:
    """Radial law of the m-variate Student distribution with nu degrees of freedom.

    f_R(r) is proportional to r^(m-1) (1 + r^2/nu)^(-(nu+m)/2).  The mass is
    normalized by quadrature and the survival function is tabulated on
    log-spaced knots with monotone cubic Hermite interpolation.
    """

    def __init__(self, dim, nu, n_knots=N_KNOTS):
        if nu <= 0:
            raise DomainError(f"Student degrees of freedom must be positive, got {nu}")
        self.dim, self.nu = int(dim), float(nu)
        self._log_c = 0.0
        knots = math.sqrt(self.nu) * np.logspace(-4.0, 6.0, n_knots)
        opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
        head = integrate.quad(self._kernel, 0.0, knots[0], **opts)[0]
        top = knots[-1]
        # u = top / r maps the tail onto (0, 1] with integrand ~ u^(nu - 1)
        tail = integrate.quad(lambda u: self._kernel(top / u) * top / (u * u), 0.0, 1.0,
                              epsabs=0.0, epsrel=1e-12, limit=200)[0]
        pieces = np.array([integrate.quad(self._kernel, lo, hi, **opts)[0]
                           for lo, hi in zip(knots[:-1], knots[1:])])
        total = head + pieces.sum() + tail
        self._log_c = -math.log(total)
        # F from below for the lower half and S from above for the upper half,
        # so each keeps full relative precision; both agree at the switch knot
        cdf = (head + np.concatenate([[0.0], np.cumsum(pieces)])) / total
        surv = (tail + np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])) / total
        k = min(max(int(np.searchsorted(cdf, 0.5)), 1), n_knots - 2)
        cdf[k] = 1.0 - surv[k]
        logk, slope = np.log(knots), knots * self.pdf(knots)
        self._r0, self._r_mid, self._r_top = knots[0], knots[k], knots[-1]
        self._f0, self._s_top = cdf[0], surv[-1]
        self._lower = _monotone_hermite(logk[: k + 1], cdf[: k + 1], slope[: k + 1])
        self._upper = _monotone_hermite(logk[k:], surv[k:], -slope[k:])
        self.mass = 1.0

    def _kernel(self, r):
        m, nu = self.dim, self.nu
        r = np.asarray(r, dtype=float)
        log_k = -0.5 * (nu + m) * np.log1p(r * r / nu) + self._log_c
        if m > 1:
            with np.errstate(divide="ignore"):
                log_k = log_k + (m - 1) * np.log(r)
        return np.exp(log_k)

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r >= 0, self._kernel(np.maximum(r, 0.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    def pdf_deriv(self, r):
        r = np.asarray(r, dtype=float)
        m, nu = self.dim, self.nu
        out = np.asarray(self.pdf(r)) * ((m - 1) / r - (nu + m) * r / (nu + r * r))
        return float(out) if out.ndim == 0 else out

    def _split(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            low = self._f0 * (np.maximum(r, 0.0) / self._r0) ** self.dim
            high = self._s_top * (self._r_top / np.maximum(r, self._r_top)) ** self.nu
        # power-law continuations: F ~ c r^m near 0, S ~ c r^(-nu) at infinity
        f_part = np.where(r < self._r0, low,
                          self._lower(np.log(np.clip(r, self._r0, self._r_mid))))
        s_part = np.where(r > self._r_top, high,
                          self._upper(np.log(np.clip(r, self._r_mid, self._r_top))))
        return r, f_part, s_part

    def cdf(self, r):
        r, f_part, s_part = self._split(r)
        out = np.clip(np.where(r <= self._r_mid, f_part, 1.0 - s_part), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def sf(self, r):
        """Survival 1 - F_R(r)."""
        r, f_part, s_part = self._split(r)
        out = np.clip(np.where(r <= self._r_mid, 1.0 - f_part, s_part), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(~((p > 0) & (p < 1))):
            raise DomainError("quantile requires p in (0, 1)")
        hi = expand_upper(self.cdf, float(np.max(p)), math.sqrt(self.nu))
        out = invert_increasing(self.cdf, p, 0.0, hi, xtol=1e-13)
        return float(out) if out.ndim == 0 else out

    def __str__(self):
        return f"student-radial(m={self.dim}, nu={self.nu:g})"


@dataclass(frozen=True)
class EllipticalLaw:
    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray
    generator: str
    nu: float | None = None
    radial: object = field(default=None, compare=False, repr=False)

    @property
    def dim(self):
        return self.mean.size

    def to_dict(self):
        gen = self.generator if self.nu is None else {"student": self.nu}
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist(), "generator": gen}


def make_elliptical(mean, cov, generator="gaussian", nu=None):
    """Build an elliptical law; ``generator`` is 'gaussian' or 'student' (with nu)."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (mean.size, mean.size):
        raise DomainError(f"covariance shape {cov.shape} does not match mean of length {mean.size}")
    low = cholesky(cov)
    if generator == "gaussian":
        radial = chi(mean.size)
        nu = None
    elif generator == "student":
        if nu is None:
            raise DomainError("student generator needs nu")
        radial = StudentRadial(mean.size, nu)
    else:
        raise DomainError(f"unknown generator {generator!r}")
    return EllipticalLaw(mean, cov, low, generator, nu, radial)


def radial_pdf(law, r):
    return law.radial.pdf(r)


def radial_cdf(law, r):
    """F_R(r); r = +inf (the unattained-sup sentinel) maps to 1."""
    return law.radial.cdf(r)


def radial_quantile(law, p):
    return law.radial.quantile(p)


@dataclass(frozen=True)
class SpherePointSet:
    points: np.ndarray
    scheme: str
    seed: int | None = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def weights(self):
        return np.full(self.n, 1.0 / self.n)


def _unit_normals(rng, n, m):
    out = rng.standard_normal((n, m))
    norms = np.linalg.norm(out, axis=1)
    bad = norms < 1e-12
    while bad.any():
        out[bad] = rng.standard_normal((int(bad.sum()), m))
        norms = np.linalg.norm(out, axis=1)
        bad = norms < 1e-12
    return out / norms[:, None]


def sphere_points(m, n, scheme="monte_carlo", seed=0):
    """Equal-weight points on the unit sphere of R^m.

    ``equal_angle`` (m = 2 only) uses angles 2 pi k / n; ``monte_carlo``
    normalizes seeded standard normal draws.
    """
    if n < 1:
        raise DomainError("need at least one sphere point")
    if scheme in ("equal_angle", "equal_angle_2d"):
        if m != 2:
            raise DomainError("equal_angle points exist only for m = 2")
        ang = 2.0 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
        # exact axis points keep the small-n cases exact
        pts[np.isclose(pts, 0.0, atol=1e-15)] = 0.0
        return SpherePointSet(pts, "equal_angle", None)
    if scheme == "monte_carlo":
        return SpherePointSet(_unit_normals(np.random.default_rng(seed), n, m), "monte_carlo", seed)
    raise DomainError(f"unknown sphere scheme {scheme!r}")


def default_points(m, n=None, seed=0):
    if m == 2:
        return sphere_points(2, n or DEFAULT_ANGLE_POINTS, "equal_angle")
    return sphere_points(m, n or DEFAULT_MC_POINTS, "monte_carlo", seed)


@dataclass(frozen=True)
class ProbabilityEstimate:
    value: float
    std_err: float
    n: int

    def to_dict(self):
        return {"phi": self.value, "std_err": self.std_err, "n": self.n}


def _check_representation(law, oracle, x):
    g0 = float(oracle.eval(x, law.mean[None, :])[0])
    if g0 > 0:
        raise RepresentationError(f"g(x, mu) = {g0:.6g} > 0: the mean is infeasible at x")


def probability(law, rho, x, pts, oracle=None):
    """phi(x) as the equal-weight sphere average of F_R(rho(x, v)).

    ``rho(x, V)`` must return one radius per row of V (inf allowed).  With an
    oracle, the representation guard g(x, mu) <= 0 is enforced.
    """
    if oracle is not None:
        _check_representation(law, oracle, x)
    radii = np.asarray(rho(x, pts.points), dtype=float)
    vals = np.asarray(radial_cdf(law, radii), dtype=float)
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ProbabilityEstimate(float(np.clip(vals.mean(), 0.0, 1.0)), se, n)


def sample_law(law, n, rng):
    """n draws of xi = mu + r L zeta with r from the inverted radial cdf."""
    zeta = _unit_normals(rng, n, law.dim)
    u = rng.random(n)
    u = np.where(u > 0, u, np.nextafter(0.0, 1.0))
    r = np.asarray(radial_quantile(law, u), dtype=float)
    return law.mean + r[:, None] * (zeta @ law.chol.T)


def direct_mc_probability(law, g, x, n, seed=0):
    """Crude Monte-Carlo estimate of P[g(x, xi) <= 0]."""
    if n < 1:
        raise DomainError("need n >= 1")
    xi = sample_law(law, n, np.random.default_rng(seed))
    hits = np.asarray(g.eval(x, xi), dtype=float) <= 0.0
    p = float(hits.mean())
    return ProbabilityEstimate(p, math.sqrt(p * (1.0 - p) / n), n)

