"""Problem specifications: parsing, validation and model construction."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from . import catalog
from .concavity import transform_from_spec
from .copulas import from_dict as copula_from_dict
from .distributions import from_dict as marginal_from_dict
from .elliptical import default_points, make_elliptical, probability, sphere_points
from .errors import CertctlError, SpecError
from .rho import ConstraintOracle, make_rho, quadratic_oracle, quadratic_spec

MODELS = ("elliptical_quadratic", "elliptical_custom_catalog", "separable_copula")
TOP_KEYS = {"name", "model", "law", "constraint", "copula", "delta_nd", "p0",
            "integration", "t_star", "grid", "certify", "prior_work"}


def _strict(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise SpecError(f"{where} must be a mapping, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    if unknown:
        raise SpecError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise SpecError(f"missing keys in {where}: {missing}")
    return d


@dataclass
class ProblemSpec:
    name: str
    model: Optional[str] = None
    law: Optional[dict] = None
    constraint: Optional[dict] = None
    copula: Optional[dict] = None
    delta_nd: float = 1.0
    p0: float = 0.5
    integration: dict = field(default_factory=dict)
    t_star: Optional[float] = None
    grid: Optional[dict] = None
    certify: Optional[dict] = None
    prior_work: Optional[dict] = None
    _model: object = field(default=None, repr=False, compare=False)


def parse_spec(raw):
    """Validate a raw mapping and return a ProblemSpec."""
    _strict(raw, TOP_KEYS, "spec", required=("name",))
    spec = ProblemSpec(**raw)
    if spec.model is not None and spec.model not in MODELS:
        raise SpecError(f"model must be one of {MODELS}, got {spec.model!r}")
    if spec.model is None and spec.certify is None:
        raise SpecError("spec needs a model or a certify section")
    try:
        spec.delta_nd, spec.p0 = float(spec.delta_nd), float(spec.p0)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"delta_nd and p0 must be numbers: {exc}") from None
    if spec.delta_nd < 1:
        raise SpecError("delta_nd must be >= 1")
    if not 0.5 <= spec.p0 <= 1:
        raise SpecError("p0 must lie in [1/2, 1]")
    _strict(spec.integration, {"scheme", "n", "seed"}, "integration")
    if spec.grid is not None:
        _strict(spec.grid, {"box", "n"}, "grid")
    if spec.certify is not None:
        _strict(spec.certify, {"g_concavity", "concave_ginv", "copula_ginv", "tstar"}, "certify")
    if spec.prior_work is not None:
        _strict(spec.prior_work, {"label", "normal_point"}, "prior_work",
                required=("label", "normal_point"))
    if spec.model is not None:
        # build once so that every consistency error surfaces at parse time
        spec._model = _build(spec)
    return spec


def load_spec(path_or_name):
    """Read a YAML spec file, or fall back to a catalog problem of that name."""
    if os.path.exists(path_or_name):
        try:
            with open(path_or_name, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise SpecError(f"cannot parse {path_or_name}: {exc}") from None
        return parse_spec(raw)
    try:
        raw = catalog.problem(path_or_name)
    except KeyError as exc:
        raise SpecError(f"no spec file or catalog entry named {path_or_name!r}") from exc
    return parse_spec(raw)


# -- models --------------------------------------------------------------------

@dataclass
class EllipticalModel:
    spec: ProblemSpec
    law: object
    oracle: ConstraintOracle
    rho: object
    decision_dim: Optional[int]

    @property
    def m(self):
        return self.law.dim

    def points(self, seed=None, n=None):
        integ = self.spec.integration
        scheme = integ.get("scheme")
        n = n or integ.get("n")
        seed = integ.get("seed", 0) if seed is None else seed
        if scheme is None:
            return default_points(self.m, n, seed)
        return sphere_points(self.m, int(n or (720 if self.m == 2 else 20000)), scheme, seed)

    def phi(self, x, pts):
        return probability(self.law, self.rho, x, pts, self.oracle)


@dataclass
class SeparableModel:
    spec: ProblemSpec
    marginals: list
    hs: list
    transforms: list
    b: list
    outer: object
    copula: object
    domain: Optional[np.ndarray]
    decision_dim: int

    def phi(self, x):
        from .copulas import separable_prob

        x = np.asarray(x, dtype=float)
        h = [float(hi(x)) for hi in self.hs]
        return separable_prob(h, self.marginals, self.copula)


def _law(raw):
    _strict(raw, {"mean", "cov", "generator"}, "law", required=("mean", "cov"))
    gen = raw.get("generator", "gaussian")
    if isinstance(gen, dict):
        _strict(gen, {"student"}, "law.generator", required=("student",))
        return make_elliptical(raw["mean"], raw["cov"], "student", float(gen["student"]))
    if gen != "gaussian":
        raise SpecError(f"unknown generator {gen!r}")
    return make_elliptical(raw["mean"], raw["cov"], "gaussian")


def _custom_constraint(raw, law):
    _strict(raw, {"catalog", "params"}, "constraint", required=("catalog",))
    name, params = raw["catalog"], dict(raw.get("params", {}))
    mean = law.mean
    if name == "ball":
        _strict(params, {"radius"}, "ball params")
        r2 = float(params.get("radius", 1.0)) ** 2
        oracle = ConstraintOracle(lambda x, z: np.sum(z * z, axis=1) - r2, True, "ball")
        return oracle, make_rho(oracle, law), None
    if name == "halfspace":
        _strict(params, {"a", "c0"}, "halfspace params", required=("a",))
        a = np.asarray(params["a"], dtype=float)
        c0 = float(params.get("c0", 1.0))
        if c0 <= 0 or a.size != law.dim:
            raise SpecError("halfspace needs c0 > 0 and len(a) equal to the law dimension")
        oracle = ConstraintOracle(lambda x, z: z @ a - (c0 + float(np.dot(x, x))), True, "halfspace")
        return oracle, make_rho(oracle, law), None
    if name == "never-binding":
        oracle = ConstraintOracle(lambda x, z: -np.ones(z.shape[0]), True, "never-binding")
        return oracle, (lambda x, v: np.full(np.atleast_2d(v).shape[0], np.inf)), None
    if name == "always-infeasible":
        # feasible only at the mean itself, so every ray leaves at once
        oracle = ConstraintOracle(lambda x, z: np.linalg.norm(z - mean, axis=1), True,
                                  "always-infeasible")
        return oracle, (lambda x, v: np.zeros(np.atleast_2d(v).shape[0])), None
    raise SpecError(f"unknown constraint catalog entry {name!r}")


def _separable(spec):
    law = _strict(spec.law, {"marginals"}, "law", required=("marginals",))
    try:
        marginals = [marginal_from_dict(d) for d in law["marginals"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"bad marginal: {exc}") from None
    con = _strict(spec.constraint, {"h", "transforms", "b", "outer", "domain"}, "constraint",
                  required=("h", "transforms", "b"))
    m = len(marginals)
    if not (len(con["h"]) == len(con["transforms"]) == len(con["b"]) == m):
        raise SpecError("h, transforms, b and marginals must have equal lengths")
    hs, dims = [], set()
    for entry in con["h"]:
        _strict(entry, {"catalog", "params"}, "constraint.h entry", required=("catalog",))
        h, d = catalog.h_function(entry)
        hs.append(h)
        dims.add(d)
    if len(dims) != 1:
        raise SpecError("all h functions must share one decision dimension")
    try:
        transforms = [transform_from_spec(t) for t in con["transforms"]]
        outer = transform_from_spec(con["outer"]) if con.get("outer") else None
        cop = copula_from_dict(_strict(spec.copula, {"kind", "dim", "theta"}, "copula",
                                       required=("kind",)))
    except (KeyError, ValueError) as exc:
        raise SpecError(str(exc)) from None
    if cop.dim != m:
        raise SpecError(f"copula dimension {cop.dim} does not match {m} marginals")
    domain = None
    if con.get("domain") is not None:
        domain = np.asarray(con["domain"], dtype=float)
        if domain.shape != (2, next(iter(dims))):
            raise SpecError("constraint.domain must be [[lower corner], [upper corner]]")
    return SeparableModel(spec, marginals, hs, transforms, [float(v) for v in con["b"]], outer,
                          cop, domain, dims.pop())


def build_model(spec):
    """The model described by a spec, built once and cached on it."""
    if spec._model is None:
        spec._model = _build(spec)
    return spec._model


def _build(spec):
    if spec.model is None:
        raise SpecError(f"spec {spec.name!r} has no model section")
    try:
        if spec.model == "separable_copula":
            return _separable(spec)
        if spec.law is None or spec.constraint is None:
            raise SpecError("elliptical models need law and constraint sections")
        law = _law(spec.law)
        if spec.model == "elliptical_quadratic":
            c = _strict(spec.constraint, {"W", "linear", "offset"}, "constraint",
                        required=("W", "linear", "offset"))
            q = quadratic_spec(c["W"], c["linear"], c["offset"])
            if q.dim != law.dim:
                raise SpecError(f"constraint dimension {q.dim} differs from law dimension {law.dim}")
            kind, arg = next(iter(q.form.items()))
            ddim = 2 if kind == "figure1" else len(arg) if kind == "linear" else None
            oracle = quadratic_oracle(q, spec.name)
            return EllipticalModel(spec, law, oracle, make_rho(oracle, law), ddim)
        oracle, rho, ddim = _custom_constraint(spec.constraint, law)
        return EllipticalModel(spec, law, oracle, rho, ddim)
    except SpecError:
        raise
    except (CertctlError, KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"invalid spec {spec.name!r}: {exc}") from None


def effective_seed(spec, cli_seed=None):
    """--seed beats CERTCTL_SEED, which beats the spec file."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get("CERTCTL_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise SpecError(f"CERTCTL_SEED must be an integer, got {env!r}") from None
    return int(spec.integration.get("seed", 0))
