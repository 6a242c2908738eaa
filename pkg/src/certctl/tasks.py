"""Threshold and certificate computations shared by the CLI and the verify suite."""

from __future__ import annotations

import math

import numpy as np

from . import catalog
from .concavity import (
    box_sampler,
    check_concave_ginv,
    check_g_concavity,
    g_decreasing_tstar,
    power,
    transform_from_spec,
)
from .copulas import check_copula_concave_ginv, from_dict as copula_from_dict
from .distributions import chi, from_dict as marginal_from_dict
from .errors import CertificationError, SpecError
from .intervals import Interval
from .problem import EllipticalModel, build_model
from .special import std_normal_cdf
from .thresholds import (
    copula_threshold,
    eventual_threshold_elliptical,
    gaussian_refined_threshold,
    quadratic_tstar,
)

TAIL = 1e-12
STUDENT_BRACKET = (0.05, 200.0)


def certified_interval(F, G, b, tail=TAIL):
    """z-interval between G(b) and G(t_far), with F(t_far) = 1 - tail.

    Beyond t_far the cdf differs from 1 by less than ``tail``, which is where
    the sampled certificate is truncated.
    """
    far = float(F.quantile(1.0 - tail))
    if far <= b:
        far = 2.0 * b if b > 0 else b + 1.0
    za, zb = float(G(b)), float(G(far))
    return Interval(min(za, zb), max(za, zb))


def separable_certificates(model, seed=0):
    """Reports for F_i concave-G_i^-1 beyond b_i and, when a domain is set, h_i G_i-concave."""
    reports = []
    for i, (F, G, b) in enumerate(zip(model.marginals, model.transforms, model.b)):
        rep = check_concave_ginv(F, G, certified_interval(F, G, b), seed=seed, outer=model.outer)
        rep.label = f"marginal {i} {F}: {rep.label}"
        reports.append(rep)
    if model.domain is not None:
        lo, hi = model.domain
        sampler = box_sampler(lo, hi)
        for i, (h, G) in enumerate(zip(model.hs, model.transforms)):
            rep = check_g_concavity(h, G, sampler, seed=seed)
            rep.label = f"h_{i} {rep.label}"
            reports.append(rep)
    if model.outer is not None:
        m = len(model.marginals)
        rep = check_copula_concave_ginv(model.copula, [model.outer] * m, [(-6.0, 0.0)] * m,
                                        seed=seed)
        reports.append(rep)
    return reports


def threshold_record(spec, seed=0):
    """All threshold routes that apply to the spec, with their certificates."""
    model = build_model(spec)
    out = {"name": spec.name, "reports": []}
    if isinstance(model, EllipticalModel):
        law, m = model.law, model.m
        if spec.model == "elliptical_quadratic" and law.generator == "gaussian":
            t = quadratic_tstar(law, seed=seed)
            refined = gaussian_refined_threshold(m)
            out["reports"].append(refined.to_dict())
            route = eventual_threshold_elliptical(chi(m), t, m, spec.delta_nd, spec.p0)
        else:
            if spec.model == "elliptical_quadratic":
                t = g_decreasing_tstar(law.radial, power(-3.0), STUDENT_BRACKET)
                rep = check_concave_ginv(law.radial, power(-3.0),
                                         Interval.left_open(0.0, t**-3.0), seed=seed)
                if not rep.holds:
                    raise CertificationError("radial cdf is not concave-(-3) beyond t*", rep)
            elif spec.t_star is not None:
                t = float(spec.t_star)
            else:
                raise SpecError("custom elliptical constraints need a t_star entry for thresholds")
            route = eventual_threshold_elliptical(law.radial, t, m, spec.delta_nd, spec.p0)
        out["reports"].append(route.to_dict())
    else:
        certs = separable_certificates(model, seed)
        failed = [r for r in certs if not r.holds]
        out["certificates"] = [r.to_dict() for r in certs]
        if failed:
            raise CertificationError(f"{len(failed)} certificate(s) failed: {failed[0].label}",
                                     out)
        out["reports"].append(copula_threshold(model.marginals, model.b).to_dict())
    if spec.prior_work is not None:
        z = float(spec.prior_work["normal_point"])
        out["prior_work"] = {"label": spec.prior_work["label"], "p_star": float(std_normal_cdf(z))}
    return out


def _interval(raw):
    allowed = {"lo", "hi", "lo_closed", "hi_closed"}
    if not isinstance(raw, dict) or set(raw) - allowed or not {"lo", "hi"} <= set(raw):
        raise SpecError(f"interval needs lo/hi (optionally lo_closed/hi_closed), got {raw!r}")
    return Interval(float(raw["lo"]), float(raw["hi"]), bool(raw.get("lo_closed", True)),
                    bool(raw.get("hi_closed", True)))


def _density(raw):
    if isinstance(raw, dict) and "catalog" in raw:
        if raw["catalog"] not in catalog.DENSITIES:
            raise SpecError(f"unknown density {raw['catalog']!r}")
        return catalog.DENSITIES[raw["catalog"]]
    d = marginal_from_dict(raw)
    return d.pdf, d.pdf_deriv


CHECK_KEYS = {
    "g_concavity": {"function", "transform", "box", "n", "tol"},
    "concave_ginv": {"marginal", "transform", "interval", "outer", "n", "tol"},
    "copula_ginv": {"copula", "transforms", "region", "n", "tol"},
    "tstar": {"density", "transform", "bracket"},
}


def certify_record(spec, check, seed=0):
    """Run one named certificate; returns (record, holds)."""
    if check not in CHECK_KEYS:
        raise SpecError(f"unknown check {check!r}")
    section = (spec.certify or {}).get(check)
    if section is None:
        raise SpecError(f"spec {spec.name!r} has no certify.{check} section")
    extra = set(section) - CHECK_KEYS[check]
    if extra:
        raise SpecError(f"unknown keys in certify.{check}: {sorted(extra)}")
    try:
        n = section.get("n")
        tol = float(section.get("tol", 1e-9))
        if check == "g_concavity":
            f, _ = catalog.h_function(section["function"])
            lo, hi = (np.asarray(c, dtype=float) for c in section["box"])
            if lo.size == 1:
                lo, hi = float(lo[0]), float(hi[0])
            rep = check_g_concavity(f, transform_from_spec(section["transform"]),
                                    box_sampler(lo, hi), n or 2000, tol, seed)
        elif check == "concave_ginv":
            outer = section.get("outer")
            rep = check_concave_ginv(marginal_from_dict(section["marginal"]),
                                     transform_from_spec(section["transform"]),
                                     _interval(section["interval"]), n or 2000, tol, seed,
                                     outer=transform_from_spec(outer) if outer else None)
        elif check == "copula_ginv":
            rep = check_copula_concave_ginv(copula_from_dict(section["copula"]),
                                            [transform_from_spec(t) for t in section["transforms"]],
                                            section["region"], n or 5000, tol, seed)
        else:
            pdf, dpdf = _density(section["density"])
            t = g_decreasing_tstar(pdf, transform_from_spec(section["transform"]),
                                   section["bracket"], density_deriv=dpdf)
            return {"check": "tstar", "name": spec.name, "t_star": t, "holds": True}, True
    except KeyError as exc:
        raise SpecError(f"certify.{check}: {exc}") from None
    record = {"check": check, "name": spec.name, **rep.to_dict()}
    return record, rep.holds


def mask_threshold(model):
    """Radius t* used for the convexity-region mask, or None when unknown."""
    if model.spec.model == "elliptical_quadratic" and model.law.generator == "gaussian":
        return math.sqrt(model.m + 3)
    if model.spec.model == "elliptical_quadratic":
        return g_decreasing_tstar(model.law.radial, power(-3.0), STUDENT_BRACKET)
    if model.spec.t_star is not None:
        return float(model.spec.t_star)
    return None
