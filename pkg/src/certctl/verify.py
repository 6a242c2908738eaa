"""Reference-number suite: every named example evaluated against its expected value."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Callable

from . import catalog
from .concavity import g_decreasing_tstar, power, transform_from_spec
from .distributions import chi, exponential, from_dict, rayleigh
from .errors import CertctlError
from .problem import build_model, parse_spec
from .special import std_normal_cdf
from .tasks import threshold_record
from .thresholds import copula_threshold, gaussian_refined_threshold

P_TOL = 5e-5


@dataclass
class Entry:
    id: str
    expected: float
    tol: float
    compute: Callable


@dataclass
class Row:
    id: str
    expected: float
    computed: float | None
    tol: float
    status: str
    note: str = ""

    def to_dict(self):
        return dict(self.__dict__)


def _p_star(problems, name):
    spec = parse_spec(copy.deepcopy(problems[name]))
    reports = threshold_record(spec)["reports"]
    return reports[0]["p_star"]


def _marginal_at(problems, name, i):
    model = build_model(parse_spec(copy.deepcopy(problems[name])))
    return float(model.marginals[i].cdf(model.b[i]))


def _exp_rayleigh(lam):
    alphas = (-6.0, -3.0, -1.0)
    b = [3.0 / (2.0 * lam)] + [math.sqrt((1.0 - a / 2.0) * 1.5) for a in alphas]
    return copula_threshold([exponential(lam)] + [rayleigh(1.5)] * 3, b).p_star


def _rayleigh_bound():
    vals = {a: float(rayleigh(1.5).cdf(math.sqrt((1.0 - a / 2.0) * 1.5))) for a in (-6.0, -3.0, -1.0)}
    best = max(vals, key=vals.get)
    # report nan when the max is not attained at alpha = -6
    return vals[best] if best == -6.0 else math.nan


def _tstar_entry(problems, name):
    section = problems[name]["certify"]["tstar"]
    density = from_dict(section["density"])
    return g_decreasing_tstar(density, transform_from_spec(section["transform"]),
                              section["bracket"])


def entries(problems=None):
    """The suite, built from ``problems`` (the catalog by default) so it can be perturbed."""
    problems = catalog.PROBLEMS if problems is None else problems
    quad_m = len(problems["paper-quadratic-2d"]["law"]["mean"])
    out = [
        Entry("refined-quadratic-threshold", 0.9873, P_TOL,
              lambda: gaussian_refined_threshold(quad_m).p_star),
        Entry("quadratic-threshold-cli", 0.9873, P_TOL,
              lambda: _p_star(problems, "paper-quadratic-2d")),
        Entry("normal-cdf-1.86", 0.9686, P_TOL,
              lambda: _marginal_at(problems, "zadeh-khorram-ex1", 0)),
        Entry("chi-cdf-sqrt3", 0.7769, P_TOL,
              lambda: _marginal_at(problems, "zadeh-khorram-ex1", 1)),
        Entry("ex1-threshold", 0.9686, P_TOL, lambda: _p_star(problems, "zadeh-khorram-ex1")),
        Entry("chi-cdf-1.3223", 0.5828, P_TOL,
              lambda: _marginal_at(problems, "zadeh-khorram-ex1-g0", 1)),
        Entry("ex1-g0-threshold", 0.9497, P_TOL, lambda: _p_star(problems, "zadeh-khorram-ex1-g0")),
        Entry("prior-work-phi3", 0.9987, P_TOL, lambda: float(std_normal_cdf(3.0))),
        Entry("exp-cdf-3/(2 lambda)", 0.7769, P_TOL,
              lambda: float(exponential(2.0).cdf(0.75))),
        Entry("rayleigh-bound", 0.7364, P_TOL, _rayleigh_bound),
        Entry("chi2-quantile-0.5828", 1.3223, P_TOL, lambda: float(chi(2).quantile(0.5828))),
    ]
    for lam in (0.5, 1.0, 2.0):
        out.append(Entry(f"exp-rayleigh-threshold(lambda={lam:g})", 0.7769, P_TOL,
                         lambda lam=lam: _exp_rayleigh(lam)))
    out.append(Entry("tstar-normal-exotic", 1.8528, 1e-3,
                     lambda: _tstar_entry(problems, "zadeh-khorram-ex1")))
    for m in (2, 3, 5):
        for a in (-1.0, -3.0):
            out.append(Entry(f"tstar-chi{m}-alpha{a:g}", math.sqrt(m - a), 1e-6,
                             lambda m=m, a=a: g_decreasing_tstar(chi(m), power(a), (0.1, 10.0))))
    return out


def run(problems=None):
    rows = []
    for e in entries(problems):
        try:
            got = float(e.compute())
            ok = math.isfinite(got) and abs(got - e.expected) <= e.tol
            rows.append(Row(e.id, e.expected, got, e.tol, "PASS" if ok else "FAIL"))
        except CertctlError as exc:
            rows.append(Row(e.id, e.expected, None, e.tol, "FAIL", f"{type(exc).__name__}: {exc}"))
    return rows


def format_table(rows):
    head = f"{'id':40s} {'expected':>10s} {'computed':>14s} {'tol':>8s}  status"
    lines = [head, "-" * len(head)]
    for r in rows:
        got = "error" if r.computed is None else f"{r.computed:.8g}"
        lines.append(f"{r.id:40s} {r.expected:10.6g} {got:>14s} {r.tol:8.1e}  {r.status}")
        if r.note:
            lines.append(f"    {r.note}")
    n_fail = sum(r.status != "PASS" for r in rows)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} passed")
    return "\n".join(lines)


__all__ = ["Entry", "Row", "entries", "run", "format_table"]
