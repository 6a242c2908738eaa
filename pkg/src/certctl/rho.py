"""The radius function rho(x, v) = sup{t >= 0 : g(x, mu + t L v) <= 0}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .concavity import TransformG
from .errors import DomainError, RepresentationError
from .intervals import Interval

R_MAX = 1e6
RHO_TOL = 1e-10


@dataclass(frozen=True)
class QuadraticSpec:
    """g(x, z) = z^T W(x) z + linear^T z + offset with offset < 0."""

    W: Callable
    linear: np.ndarray
    offset: float
    form: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.offset < 0:
            raise DomainError(f"quadratic offset b must be negative, got {self.offset}")
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float))

    @property
    def dim(self):
        return self.linear.size

    def matrix(self, x):
        w = np.asarray(self.W(np.asarray(x, dtype=float)), dtype=float)
        if w.shape != (self.dim, self.dim):
            raise DomainError(f"W(x) has shape {w.shape}, expected {(self.dim, self.dim)}")
        return w

    def value(self, x, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        w = self.matrix(x)
        return np.einsum("ni,ij,nj->n", z, w, z) + z @ self.linear + self.offset


def w_constant(mat):
    mat = np.asarray(mat, dtype=float)
    return lambda x: mat


def w_linear(mats):
    """W(x) = sum_i x_i W_i."""
    mats = np.asarray(mats, dtype=float)
    return lambda x: np.tensordot(np.asarray(x, dtype=float), mats, axes=1)


def w_figure1():
    """W(x) = diag(x1^2 + 0.5, |x2 - 1|^3 + 0.2)."""
    return lambda x: np.diag([x[0] ** 2 + 0.5, abs(x[1] - 1.0) ** 3 + 0.2])


def quadratic_spec(form, linear, offset):
    """Build a QuadraticSpec from a W form description.

    ``form`` is {'constant': M}, {'linear': [W_1, ..., W_n]} or {'figure1': True}.
    """
    if not isinstance(form, dict) or len(form) != 1:
        raise DomainError(f"W form must have exactly one key, got {form!r}")
    (kind, arg), = form.items()
    if kind == "constant":
        W = w_constant(arg)
    elif kind == "linear":
        W = w_linear(arg)
    elif kind == "figure1":
        W = w_figure1()
    else:
        raise DomainError(f"unknown W form {kind!r}")
    return QuadraticSpec(W, linear, float(offset), {kind: arg})


@dataclass(frozen=True)
class ConstraintOracle:
    """Evaluator of g(x, z), vectorized over rows of z.

    Vector-valued constraints (rows of shape (n, k)) are reduced by a
    componentwise max so that {g <= 0} keeps its meaning.
    """

    fn: Callable
    convex_in_z: bool = True
    label: str = "g"
    quadratic: Optional[QuadraticSpec] = None

    def eval(self, x, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        out = np.asarray(self.fn(np.asarray(x, dtype=float), z), dtype=float)
        if out.ndim == 2:
            out = out.max(axis=1)
        return np.broadcast_to(out, (z.shape[0],)).astype(float)


def quadratic_oracle(spec, label="quadratic"):
    return ConstraintOracle(spec.value, True, label, spec)


def _directions(law, v):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return v @ law.chol.T


def _finish(out, v):
    return float(out[0]) if np.ndim(v) == 1 else out


def rho_bisect(g, x, v, law, r_max=R_MAX, tol=RHO_TOL):
    """Radius along mu + r L v by doubling from r = 1 and bisection.

    Assumes a single sign change of r -> g(x, mu + r L v).  Returns inf when
    the point at r_max is still feasible.
    """
    g0 = float(g.eval(x, law.mean)[0])
    if g0 >= 0:
        raise RepresentationError(f"g(x, mu) = {g0:.6g} is not negative")
    u = _directions(law, v)
    n = u.shape[0]

    def at(r, rows):
        return g.eval(x, law.mean + r[:, None] * u[rows])

    lo, hi = np.zeros(n), np.ones(n)
    hi = np.minimum(hi, r_max)
    open_ = np.ones(n, dtype=bool)
    unbounded = np.zeros(n, dtype=bool)
    while open_.any():
        idx = np.flatnonzero(open_)
        infeasible = at(hi[idx], idx) > 0
        open_[idx[infeasible]] = False
        stay = idx[~infeasible]
        capped = hi[stay] >= r_max
        unbounded[stay[capped]] = True
        open_[stay[capped]] = False
        grow = stay[~capped]
        lo[grow] = hi[grow]
        hi[grow] = np.minimum(2.0 * hi[grow], r_max)
    active = np.flatnonzero(~unbounded)
    while active.size:
        mid = 0.5 * (lo[active] + hi[active])
        bad = at(mid, active) > 0
        hi[active[bad]] = mid[bad]
        lo[active[~bad]] = mid[~bad]
        active = active[(hi[active] - lo[active]) > tol]
    out = np.where(unbounded, np.inf, 0.5 * (lo + hi))
    return _finish(out, v)


def quadratic_terms(spec, x, v, law):
    """(h, beta, c) with h = u^T W u, beta = u^T W mu + linear^T u / 2, c = g(x, mu)."""
    u = _directions(law, v)
    w = spec.matrix(x)
    h = np.einsum("ni,ij,nj->n", u, w, u)
    beta = u @ (w @ law.mean) + 0.5 * (u @ spec.linear)
    c = float(spec.value(x, law.mean)[0])
    return h, beta, c


def rho_quadratic(spec, x, v, law):
    """Closed-form radius for a quadratic constraint.

    Solves h r^2 + 2 beta r + c = 0 for its positive root, written in the
    cancellation-free form when beta > 0; h = 0 with beta <= 0 gives inf.
    """
    h, beta, c = quadratic_terms(spec, x, v, law)
    if c >= 0:
        raise RepresentationError(f"g(x, mu) = {c:.6g} is not negative")
    if np.any(h < -1e-12 * np.maximum(1.0, np.abs(beta))):
        raise DomainError("W(x) is not positive semidefinite along a sampled direction")
    h = np.maximum(h, 0.0)
    disc = np.sqrt(np.maximum(beta * beta - c * h, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = -c / (beta + disc)
        neg = np.where(h > 0, (disc - beta) / h, np.inf)
    return _finish(np.where(beta > 0, pos, neg), v)


def gv_transform(spec, v, law):
    """The transform g_v(t) = -(b/t + beta(v))^2 attached to one direction v."""
    if np.any(law.mean != 0):
        raise DomainError("g_v is defined for centred laws (mu = 0)")
    b = spec.offset
    beta = float(0.5 * _directions(law, v)[0] @ spec.linear)
    domain = Interval.open(0.0, math.inf) if beta <= 0 else Interval.left_open(0.0, -b / beta)
    err = dict(divide="ignore", invalid="ignore", over="ignore")

    def wrap(fun):
        def out(t):
            with np.errstate(**err):
                val = fun(np.asarray(t, dtype=float))
            return float(val) if np.ndim(val) == 0 else val
        return out

    return TransformG(
        wrap(lambda t: -(b / t + beta) ** 2),
        wrap(lambda t: 2.0 * b / t**2 * (b / t + beta)),
        wrap(lambda s: -b / (np.sqrt(-s) + beta)),
        True,
        domain,
        wrap(lambda t: -6.0 * b * b / t**4 - 4.0 * b * beta / t**3),
        f"g_v(beta={beta:.6g})",
    )


def make_rho(oracle, law, r_max=R_MAX, tol=RHO_TOL):
    """rho(x, V) using the closed form when the oracle is quadratic."""
    if oracle.quadratic is not None:
        return lambda x, v: rho_quadratic(oracle.quadratic, x, v, law)
    return lambda x, v: rho_bisect(oracle, x, v, law, r_max, tol)
