"""Builtin functions, constraint families and named problems."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

SQRT3 = math.sqrt(3.0)
SIGMA_CUSTOM = [[0.01125, 0.00675], [0.00675, 0.2025]]


# -- h functions for separable models; vectorized over rows of (x, y) -------

def _xy(p):
    p = np.asarray(p, dtype=float)
    return (p[..., 0], p[..., 1]) if p.ndim >= 1 and p.shape[-1] == 2 else (p, None)


def pow_ratio(p):
    x, y = _xy(p)
    return (y / x**2) ** 2


def neg_exp_cube(p):
    x, y = _xy(p)
    return np.exp(-((x + y) ** 3))


def inv_quadratic(p):
    x, y = _xy(p)
    return 1.0 / (x**2 + y**2 + 1.0)


def neg_exp_cube_1d(x):
    return np.exp(-np.asarray(x, dtype=float) ** 3)


def convex_power(alpha, shift=1.0):
    """(shift + x^2 + y^2)^alpha, alpha-concave for alpha < 0."""

    def h(p):
        x, y = _xy(p)
        return (shift + x**2 + y**2) ** alpha

    return h


H_FUNCTIONS = {
    "pow-ratio": (lambda: pow_ratio, 2),
    "neg-exp-cube": (lambda: neg_exp_cube, 2),
    "inv-quadratic": (lambda: inv_quadratic, 2),
    "neg-exp-cube-1d": (lambda: neg_exp_cube_1d, 1),
    "convex-power": (convex_power, 2),
}


def h_function(entry):
    """Resolve {'catalog': name, 'params': {...}} to (h, decision_dim)."""
    name = entry.get("catalog")
    if name not in H_FUNCTIONS:
        raise DomainError(f"unknown h function {name!r}")
    maker, dim = H_FUNCTIONS[name]
    return maker(**entry.get("params", {})), dim


# -- densities for t* searches ----------------------------------------------

def sinc2_pdf(t):
    t = np.asarray(t, dtype=float)
    return 2.0 / np.pi * (np.sin(t) / t) ** 2


def sinc2_pdf_deriv(t):
    t = np.asarray(t, dtype=float)
    s, c = np.sin(t), np.cos(t)
    return 2.0 / np.pi * (2.0 * s * c / t**2 - 2.0 * s * s / t**3)


DENSITIES = {"sinc2": (sinc2_pdf, sinc2_pdf_deriv)}


# -- named problems ----------------------------------------------------------

PROBLEMS = {
    "paper-quadratic-2d": {
        "name": "paper-quadratic-2d",
        "model": "elliptical_quadratic",
        "law": {"mean": [0.0, 0.0], "cov": SIGMA_CUSTOM, "generator": "gaussian"},
        "constraint": {"W": {"figure1": True}, "linear": [1.0, 1.0], "offset": -1.0},
        "grid": {"box": [-2.0, 2.0, -1.0, 3.0], "n": 101},
    },
    "paper-quadratic-student": {
        "name": "paper-quadratic-student",
        "model": "elliptical_quadratic",
        "law": {"mean": [0.0, 0.0], "cov": SIGMA_CUSTOM, "generator": {"student": 8.0}},
        "constraint": {"W": {"figure1": True}, "linear": [1.0, 1.0], "offset": -1.0},
    },
    "zadeh-khorram-ex1": {
        "name": "zadeh-khorram-ex1",
        "model": "separable_copula",
        "law": {"marginals": [{"kind": "normal", "mean": 0.0, "sd": 1.0},
                              {"kind": "chi", "dof": 2}]},
        "constraint": {
            "h": [{"catalog": "neg-exp-cube"}, {"catalog": "inv-quadratic"}],
            "transforms": ["exotic", {"power": -1.0}],
            "b": [1.86, SQRT3],
            "domain": [[-1.0, -1.0], [1.0, 1.0]],
        },
        "copula": {"kind": "independent", "dim": 2},
        "certify": {
            "g_concavity": {"function": {"catalog": "neg-exp-cube"}, "transform": "exotic",
                            "box": [[-1.0, -1.0], [1.0, 1.0]]},
            "concave_ginv": {"marginal": {"kind": "chi", "dof": 2}, "transform": {"power": -1.0},
                             "interval": {"lo": 0.0, "hi": 1.0 / SQRT3, "lo_closed": False}},
            "copula_ginv": {"copula": {"kind": "independent", "dim": 2},
                            "transforms": ["log", "log"], "region": [[-6.0, 0.0], [-6.0, 0.0]]},
            "tstar": {"density": {"kind": "normal", "mean": 0.0, "sd": 1.0},
                      "transform": "exotic", "bracket": [1.1, 3.0]},
        },
    },
    "zadeh-khorram-ex1-g0": {
        "name": "zadeh-khorram-ex1-g0",
        "model": "separable_copula",
        "law": {"marginals": [{"kind": "normal", "mean": 0.0, "sd": 1.0},
                              {"kind": "chi", "dof": 2}]},
        "constraint": {
            "h": [{"catalog": "neg-exp-cube"}, {"catalog": "inv-quadratic"}],
            "transforms": ["exotic", {"power": -1.0}],
            "b": [1.6422, 1.3223],
            "outer": "log",
            "domain": [[-1.0, -1.0], [1.0, 1.0]],
        },
        "copula": {"kind": "gumbel", "dim": 2, "theta": 1.5},
        "prior_work": {"label": "independent-copula threshold Phi(3)", "normal_point": 3.0},
    },
    "exp-pow-ratio": {
        "name": "exp-pow-ratio",
        "model": "separable_copula",
        "law": {"marginals": [{"kind": "exponential", "rate": 1.0},
                              {"kind": "exponential", "rate": 1.0}]},
        "constraint": {
            "h": [{"catalog": "pow-ratio"}, {"catalog": "pow-ratio"}],
            "transforms": ["neg-inv-sqrt", "neg-inv-sqrt"],
            "b": [1.5, 1.5],
            "domain": [[0.5, 0.5], [3.0, 3.0]],
        },
        "copula": {"kind": "clayton", "dim": 2, "theta": 2.0},
    },
    "exp-rayleigh": {
        "name": "exp-rayleigh",
        "model": "separable_copula",
        "law": {"marginals": [{"kind": "exponential", "rate": 1.0},
                              {"kind": "rayleigh", "scale": 1.5}]},
        "constraint": {
            "h": [{"catalog": "pow-ratio"},
                  {"catalog": "convex-power", "params": {"alpha": -6.0}}],
            "transforms": ["neg-inv-sqrt", {"power": -6.0}],
            "b": [1.5, math.sqrt(4.0 * 1.5)],
        },
        "copula": {"kind": "independent", "dim": 2},
    },
    "exp-cube-alpha": {
        "name": "exp-cube-alpha",
        "certify": {
            "g_concavity": {"function": {"catalog": "neg-exp-cube-1d"},
                            "transform": {"power": -1.0}, "box": [[-2.0], [2.0]]},
            "tstar": {"density": {"catalog": "sinc2"}, "transform": {"power": -1.0},
                      "bracket": [1.0, 100.0]},
        },
    },
    "ball": {
        "name": "ball",
        "model": "elliptical_custom_catalog",
        "law": {"mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]], "generator": "gaussian"},
        "constraint": {"catalog": "ball", "params": {"radius": 1.5}},
        "t_star": 2.0,
    },
    "halfspace": {
        "name": "halfspace",
        "model": "elliptical_custom_catalog",
        "law": {"mean": [0.0, 0.0], "cov": SIGMA_CUSTOM, "generator": "gaussian"},
        "constraint": {"catalog": "halfspace", "params": {"a": [1.0, 2.0], "c0": 0.5}},
    },
    "never-binding": {
        "name": "never-binding",
        "model": "elliptical_custom_catalog",
        "law": {"mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]], "generator": "gaussian"},
        "constraint": {"catalog": "never-binding"},
    },
    "always-infeasible": {
        "name": "always-infeasible",
        "model": "elliptical_custom_catalog",
        "law": {"mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]], "generator": "gaussian"},
        "constraint": {"catalog": "always-infeasible"},
    },
}


def problem(name):
    import copy

    if name not in PROBLEMS:
        raise KeyError(f"unknown catalog problem {name!r}; known: {', '.join(sorted(PROBLEMS))}")
    return copy.deepcopy(PROBLEMS[name])
