"""Generalized concavity: power means, transforms G and sampled certificates.

A certificate here is numerical evidence, not a proof: the defining
inequality is evaluated on seeded random pairs and a fixed lambda grid, and
the worst violation is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    CertificationError,
    DomainError,
    NoSignChangeError,
    OscillationError,
    TStarError,
)
from .intervals import Interval
from .roots import bisect, sign_changes

LAMBDAS = np.linspace(0.1, 0.9, 9)
DEFAULT_PAIRS = 2000
DEFAULT_TOL = 1e-9


def generalized_mean(a, b, lam, alpha):
    """Power mean m_alpha(a, b, lam) for alpha in [-inf, inf).

    Returns 0 when ab = 0 and alpha <= 0, min(a, b) at alpha = -inf and the
    weighted geometric mean at alpha = 0.
    """
    if a < 0 or b < 0:
        raise DomainError("generalized_mean needs a, b >= 0")
    if not 0.0 <= lam <= 1.0:
        raise DomainError("generalized_mean needs lam in [0, 1]")
    if alpha == -math.inf:
        return float(min(a, b))
    if alpha == math.inf or math.isnan(alpha):
        raise DomainError("alpha must lie in [-inf, inf)")
    if a * b == 0 and alpha <= 0:
        return 0.0
    if a == 0 or b == 0:
        return float((lam * a**alpha + (1.0 - lam) * b**alpha) ** (1.0 / alpha))
    if lam == 1.0:
        return float(a)
    if lam == 0.0:
        return float(b)
    la, lb = math.log(a), math.log(b)
    if abs(alpha) * max(abs(la), abs(lb)) < 1e-280:
        # geometric mean; also avoids subnormal products losing precision
        return math.exp(lam * la + (1.0 - lam) * lb)
    if abs(alpha) * max(abs(la), abs(lb)) <= 0.5:
        # expm1/log1p keeps the small-|alpha| branch continuous with alpha = 0
        e = lam * math.expm1(alpha * la) + (1.0 - lam) * math.expm1(alpha * lb)
        return math.exp(math.log1p(e) / alpha)
    s = np.logaddexp(math.log(lam) + alpha * la, math.log1p(-lam) + alpha * lb)
    return float(math.exp(s / alpha))


@dataclass(frozen=True)
class TransformG:
    """Strictly monotone scalar transform with derivative(s) and inverse.

    All callables must accept numpy arrays.
    """

    value: Callable
    deriv: Callable
    inverse: Callable
    increasing: bool
    domain: Interval
    second_deriv: Optional[Callable] = None
    name: str = "G"

    def __call__(self, t):
        return self.value(t)

    @property
    def monotonicity(self):
        return "increasing" if self.increasing else "decreasing"


def _f(fun):
    """Wrap an array function so that scalar input gives a float."""

    def wrapped(t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = fun(arr)
        return float(out) if np.ndim(out) == 0 else out

    return wrapped


def identity():
    one = _f(lambda t: np.ones_like(t))
    zero = _f(lambda t: np.zeros_like(t))
    return TransformG(_f(lambda t: t + 0.0), one, _f(lambda t: t + 0.0), True,
                      Interval.real_line(), zero, "identity")


def log_transform():
    """G_0(t) = ln t."""
    return TransformG(
        _f(np.log),
        _f(lambda t: 1.0 / t),
        _f(np.exp),
        True,
        Interval.open(0.0, math.inf),
        _f(lambda t: -1.0 / (t * t)),
        "log",
    )


def power(alpha):
    """G_alpha(t) = t**alpha, with G_0 = ln."""
    alpha = float(alpha)
    if alpha == 0.0:
        return log_transform()
    domain = Interval.right_open(0.0, math.inf) if alpha > 0 else Interval.open(0.0, math.inf)
    return TransformG(
        _f(lambda t: t**alpha),
        _f(lambda t: alpha * t ** (alpha - 1.0)),
        _f(lambda s: s ** (1.0 / alpha)),
        alpha > 0,
        domain,
        _f(lambda t: alpha * (alpha - 1.0) * t ** (alpha - 2.0)),
        f"power({alpha:g})",
    )


def _exotic_value(x):
    return np.exp(-np.cbrt(np.log(x)))


def _exotic_deriv(x):
    c = np.cbrt(np.log(x))
    return -_exotic_value(x) / (3.0 * x * c * c)


def _exotic_second(x):
    c = np.cbrt(np.log(x))
    return _exotic_value(x) / (x * x) * (1.0 / (9.0 * c**4) + (2.0 / 3.0 + c**3) / (3.0 * c**5))


def exotic():
    """G(x) = exp(-(ln x)^(1/3)) on (0, inf), strictly decreasing.

    The cube root is the real one, so G maps (0, 1) to (1, inf).
    """
    return TransformG(
        _f(_exotic_value),
        _f(_exotic_deriv),
        _f(lambda y: np.exp((-np.log(y)) ** 3)),
        False,
        Interval.open(0.0, math.inf),
        _f(_exotic_second),
        "exotic",
    )


def neg_inv_sqrt():
    """G(t) = -1/sqrt(t) on (0, inf), increasing, range (-inf, 0)."""
    return TransformG(
        _f(lambda t: -1.0 / np.sqrt(t)),
        _f(lambda t: 0.5 * t**-1.5),
        _f(lambda z: z**-2.0),
        True,
        Interval.open(0.0, math.inf),
        _f(lambda t: -0.75 * t**-2.5),
        "neg-inv-sqrt",
    )


def normal_quantile_transform():
    """G(u) = Phi^{-1}(u) on (0, 1); its inverse is Phi."""
    from .special import std_normal_cdf, std_normal_pdf, std_normal_quantile

    def value(u):
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        return std_normal_quantile(u)

    def deriv(u):
        return 1.0 / std_normal_pdf(value(u))

    return TransformG(value, deriv, std_normal_cdf, True, Interval.open(0.0, 1.0),
                      None, "normal-quantile")


def log_squared():
    """G(u) = (ln u)^2 on (0, 1], decreasing; inverse y -> exp(-sqrt(y))."""
    return TransformG(
        _f(lambda u: np.log(u) ** 2),
        _f(lambda u: 2.0 * np.log(u) / u),
        _f(lambda y: np.exp(-np.sqrt(y))),
        False,
        Interval.left_open(0.0, 1.0),
        _f(lambda u: (2.0 - 2.0 * np.log(u)) / (u * u)),
        "log-squared",
    )


_NAMED = {
    "identity": identity,
    "log": log_transform,
    "exotic": exotic,
    "neg-inv-sqrt": neg_inv_sqrt,
    "normal-quantile": normal_quantile_transform,
    "log-squared": log_squared,
}


def transform_from_spec(spec):
    """Resolve 'log', 'exotic', ..., 'power:-1' or {'power': -1} to a transform."""
    if isinstance(spec, dict):
        if set(spec) != {"power"}:
            raise KeyError(f"unknown transform spec {spec!r}")
        return power(spec["power"])
    if isinstance(spec, str):
        if spec.startswith("power:"):
            return power(float(spec.split(":", 1)[1]))
        if spec in _NAMED:
            return _NAMED[spec]()
    raise KeyError(f"unknown transform {spec!r}")


@dataclass
class ConcavityReport:
    holds: bool
    worst_violation: float
    witness: tuple
    samples_used: int
    tol: float = DEFAULT_TOL
    label: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "label": self.label,
            "holds": self.holds,
            "worst_violation": self.worst_violation,
            "tolerance": self.tol,
            "witness": _jsonable(self.witness),
            "samples_used": self.samples_used,
            **_jsonable(self.extra),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def box_sampler(lo, hi):
    """Uniform sampler on a box; scalar bounds give 1-D samples of shape (n,)."""
    lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def sample(rng, n):
        if lo_a.ndim == 0:
            return rng.uniform(lo_a, hi_a, size=n)
        return rng.uniform(lo_a, hi_a, size=(n, lo_a.size))

    return sample


def _scaled(excess, lhs, rhs):
    return excess / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))


def _point(p):
    p = np.asarray(p)
    return float(p) if p.ndim == 0 else p.tolist()


def check_g_concavity(f, G, sampler, n_pairs=DEFAULT_PAIRS, tol=DEFAULT_TOL, seed=0,
                      lambdas=LAMBDAS):
    """Sampled test of f(lx + (1-l)y) >= G^{-1}(l G(f(x)) + (1-l) G(f(y))).

    ``f`` must be vectorized over the first axis of the sampled points.  The
    reported violation is (rhs - lhs) / max(1, |lhs|, |rhs|), so that values
    of f spanning many orders of magnitude are compared at their own scale.
    """
    rng = np.random.default_rng(seed)
    xs, ys = sampler(rng, n_pairs), sampler(rng, n_pairs)
    fx, fy = np.asarray(f(xs), dtype=float), np.asarray(f(ys), dtype=float)
    for vals in (fx, fy):
        bad = ~G.domain.contains(vals)
        if bad.any():
            raise DomainError(
                f"f takes value {vals[bad][0]:.6g} outside the domain {G.domain} of {G.name}"
            )
    gx, gy = G(fx), G(fy)
    worst, witness = -math.inf, None
    for lam in lambdas:
        mid = lam * xs + (1.0 - lam) * ys
        lhs = np.asarray(f(mid), dtype=float)
        rhs = np.asarray(G.inverse(lam * gx + (1.0 - lam) * gy), dtype=float)
        viol = _scaled(rhs - lhs, lhs, rhs)
        if np.isnan(viol).any():
            raise DomainError(f"non-finite comparison while checking {G.name}-concavity")
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, witness = float(viol[k]), (_point(xs[k]), _point(ys[k]), float(lam))
    return ConcavityReport(worst <= tol, worst, witness, n_pairs * len(lambdas), tol,
                           f"{G.name}-concavity")


def _as_cdf(F):
    return F.cdf if hasattr(F, "cdf") else F


def check_concave_ginv(F, G, interval, n=DEFAULT_PAIRS, tol=DEFAULT_TOL, seed=0,
                       outer=None, lambdas=LAMBDAS):
    """Sampled concavity test of z -> outer(F(G^{-1}(z))) on a bounded interval.

    ``outer`` defaults to the identity; passing a transform H certifies that F
    is H-concave-G^{-1}.  Random pairs on the interval are combined with a
    dense uniform grid whose neighbouring triples give midpoint tests.
    """
    cdf = _as_cdf(F)
    lo, hi = interval.inner()

    def phi(z):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            t = np.asarray(G.inverse(z), dtype=float)
            if np.isnan(t).any():
                raise DomainError(f"{G.name}^-1 is undefined on part of {interval}")
            v = np.asarray(cdf(t), dtype=float)
            if outer is not None:
                v = np.asarray(outer(v), dtype=float)
        if not np.isfinite(v).all():
            raise DomainError(f"non-finite values on {interval}")
        return v

    rng = np.random.default_rng(seed)
    z1, z2 = rng.uniform(lo, hi, n), rng.uniform(lo, hi, n)
    p1, p2 = phi(z1), phi(z2)
    worst, witness = -math.inf, None
    for lam in lambdas:
        mid = lam * z1 + (1.0 - lam) * z2
        pm = phi(mid)
        chord = lam * p1 + (1.0 - lam) * p2
        viol = _scaled(chord - pm, pm, chord)
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, witness = float(viol[k]), (float(z1[k]), float(z2[k]), float(lam))
    grid = np.linspace(lo, hi, n + 1)
    pg = phi(grid)
    for step in (1, max(1, n // 50)):
        chord = 0.5 * (pg[: -2 * step] + pg[2 * step:])
        pm = pg[step:-step]
        viol = _scaled(chord - pm, pm, chord)
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, witness = float(viol[k]), (float(grid[k]), float(grid[k + 2 * step]), 0.5)
    samples = n * len(lambdas) + 2 * (n + 1)
    label = f"concave-{G.name}^-1 on {interval}"
    if outer is not None:
        label = f"{outer.name}-" + label
    return ConcavityReport(worst <= tol, worst, witness, samples, tol, label)


def _density_pair(density, density_deriv):
    if density_deriv is not None:
        return density, density_deriv
    if hasattr(density, "pdf") and hasattr(density, "pdf_deriv"):
        return density.pdf, density.pdf_deriv
    raise TypeError("need a density with pdf/pdf_deriv or an explicit derivative")


def tstar_psi_prime(density, G, density_deriv=None):
    """psi'(t) = -G''(t)/G'(t)^2 f(t) + f'(t)/G'(t), the derivative of f/G'."""
    if G.second_deriv is None:
        raise TypeError(f"transform {G.name} has no second derivative")
    f, fp = _density_pair(density, density_deriv)

    def psi_prime(t):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g1 = np.asarray(G.deriv(t), dtype=float)
            g2 = np.asarray(G.second_deriv(t), dtype=float)
            return -g2 / (g1 * g1) * np.asarray(f(t)) + np.asarray(fp(t)) / g1

    return psi_prime


def g_decreasing_tstar(density, G, bracket, density_deriv=None, n_scan=4001, xtol=1e-9):
    """Threshold t* beyond which f/G' is strictly monotone.

    The required direction is the one that makes F o G^{-1} concave: the ratio
    must decrease for increasing G and increase for decreasing G.  psi' is
    scanned on ``n_scan`` points; exactly one sign change of the right
    orientation is accepted and refined by bisection.
    """
    lo, hi = map(float, bracket)
    psi_p = tstar_psi_prime(density, G, density_deriv)
    f, _ = _density_pair(density, density_deriv)
    grid = np.linspace(lo, hi, n_scan)
    vals = psi_p(grid)
    if not np.isfinite(vals).all():
        bad = grid[~np.isfinite(vals)][0]
        raise DomainError(f"psi' is not finite at t={bad:.6g}; shrink the bracket")
    flips = sign_changes(vals)
    if not flips:
        raise NoSignChangeError(int(np.sign(vals[np.argmax(np.abs(vals))])), (lo, hi))
    if len(flips) > 1:
        raise OscillationError(len(flips), (lo, hi))
    k = flips[0]
    want = -1.0 if G.increasing else 1.0
    if np.sign(vals[-1]) != want:
        raise TStarError(
            f"psi' changes sign at t~{grid[k]:.6g} but the ratio moves the wrong way after it"
        )
    t_star = bisect(lambda t: float(psi_p(t)), grid[k], grid[k + 1], xtol=xtol * 1e-3)

    g1 = np.asarray(G.deriv(grid), dtype=float)
    crit = [grid[i] for i in sign_changes(g1)] + list(grid[g1 == 0.0])
    if crit and not t_star > max(crit):
        raise TStarError(
            f"t*={t_star:.6g} is not strictly beyond the critical point {max(crit):.6g} of G'"
        )
    tail = np.linspace(t_star, hi, n_scan)[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(f(tail)) / np.asarray(G.deriv(tail))
    steps = np.diff(ratio) * want
    if not (steps > 0).all():
        raise TStarError("ratio f/G' is not strictly monotone beyond the computed t*")
    return float(t_star)


def check_propagation(f, G1, G2, sampler, n_pairs=DEFAULT_PAIRS, tol=DEFAULT_TOL, seed=0):
    """Certify G1-concavity of f and G2-concavity of G1^{-1}, then G2-concavity of f.

    Raises CertificationError when either premise or the conclusion fails.
    """
    first = check_g_concavity(f, G1, sampler, n_pairs, tol, seed)
    if not first.holds:
        raise CertificationError(f"f is not {G1.name}-concave on the sampled domain", first)
    rng = np.random.default_rng(seed)
    image = np.asarray(G1(np.asarray(f(sampler(rng, n_pairs)), dtype=float)), dtype=float)
    inner = check_g_concavity(G1.inverse, G2, box_sampler(image.min(), image.max()),
                              n_pairs, tol, seed + 1)
    if not inner.holds:
        raise CertificationError(
            f"{G1.name}^-1 is not {G2.name}-concave on the image of {G1.name} o f", inner
        )
    final = check_g_concavity(f, G2, sampler, n_pairs, tol, seed)
    final.extra = {"premise_worst": first.worst_violation, "inverse_worst": inner.worst_violation}
    if not final.holds:
        raise CertificationError("premises hold but the propagated check failed", final)
    return final
