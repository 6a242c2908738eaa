"""certctl command-line interface.

Exit codes: 0 success, 1 verify failure, 2 parse error, 3 representation
violated, 4 certificate failure, 5 grid requested for a non-2-D problem.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import verify as verify_mod
from .elliptical import direct_mc_probability
from .errors import CertificationError, RepresentationError, SpecError, TStarError
from .problem import EllipticalModel, build_model, effective_seed, load_spec
from .tasks import certify_record, mask_threshold, threshold_record

EXIT_VERIFY, EXIT_PARSE, EXIT_REPR, EXIT_CERT, EXIT_DIM = 1, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _floats(text, name):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise SpecError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _emit(record):
    print(json.dumps(_clean(record), sort_keys=True))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _decision(model, args):
    if args.x is None:
        raise SpecError("--x is required")
    x = np.asarray(_floats(args.x, "x"))
    if model.decision_dim is not None and x.size != model.decision_dim:
        raise SpecError(f"x has {x.size} entries, the problem expects {model.decision_dim}")
    return x


def cmd_prob(args):
    spec = load_spec(args.spec)
    model = build_model(spec)
    x = _decision(model, args)
    if isinstance(model, EllipticalModel):
        seed = effective_seed(spec, args.seed)
        est = model.phi(x, model.points(seed, args.n))
        record = {"name": spec.name, "x": x.tolist(), **est.to_dict(), "seed": seed}
        if args.mc:
            mc = direct_mc_probability(model.law, model.oracle, x, args.mc, seed)
            record["direct_mc"] = mc.to_dict()
    else:
        record = {"name": spec.name, "x": x.tolist(), "phi": model.phi(x), "std_err": 0.0, "n": 1}
    _emit(record)
    return 0


def cmd_threshold(args):
    spec = load_spec(args.spec)
    _emit(threshold_record(spec, effective_seed(spec, args.seed)))
    return 0


def _box(spec, args):
    if args.box is not None:
        box = _floats(args.box, "box")
    elif spec.grid and "box" in spec.grid:
        box = [float(v) for v in spec.grid["box"]]
    else:
        raise SpecError("--box is required for this spec")
    if len(box) != 4 or box[0] > box[1] or box[2] > box[3]:
        raise SpecError("--box must be x_min,x_max,y_min,y_max with min <= max")
    return box


def cmd_grid(args):
    spec = load_spec(args.spec)
    model = build_model(spec)
    if model.decision_dim not in (None, 2):
        print(f"grid needs a 2-D decision vector, problem has {model.decision_dim}",
              file=sys.stderr)
        return EXIT_DIM
    if args.out is None:
        raise SpecError("--out is required for grid")
    box = _box(spec, args)
    n = args.n or (spec.grid or {}).get("n", 101)
    if n < 2:
        raise SpecError("--n must be at least 2")
    xs, ys = np.linspace(box[0], box[1], n), np.linspace(box[2], box[3], n)
    seed = effective_seed(spec, None if args.seed is None else args.seed)
    elliptical = isinstance(model, EllipticalModel)
    pts = model.points(seed) if elliptical else None
    t_mask = mask_threshold(model) if elliptical else None
    rows, mask = [], []
    for x1 in xs:
        for x2 in ys:
            x = np.array([x1, x2])
            if elliptical:
                rows.append((x1, x2, model.phi(x, pts).value))
                if t_mask is not None:
                    radii = np.asarray(model.rho(x, pts.points))
                    mask.append((x1, x2, int(np.all(radii >= t_mask))))
            else:
                rows.append((x1, x2, model.phi(x)))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,phi\n")
        fh.writelines(f"{a:.9g},{b:.9g},{c:.9g}\n" for a, b, c in rows)
    record = {"name": spec.name, "out": args.out, "rows": len(rows), "n": int(n), "box": box}
    if mask:
        with open(args.out + ".mask", "w", encoding="utf-8") as fh:
            fh.write("x1,x2,mask\n")
            fh.writelines(f"{a:.9g},{b:.9g},{c:d}\n" for a, b, c in mask)
        record.update(mask=args.out + ".mask", mask_radius=t_mask,
                      mask_count=int(sum(c for _, _, c in mask)))
    _emit(record)
    return 0


def cmd_verify(args):
    rows = verify_mod.run()
    if args.json:
        _emit({"rows": [r.to_dict() for r in rows]})
    else:
        print(verify_mod.format_table(rows))
    return 0 if all(r.status == "PASS" for r in rows) else EXIT_VERIFY


def cmd_certify(args):
    spec = load_spec(args.spec)
    record, holds = certify_record(spec, args.check, effective_seed(spec, args.seed))
    _emit(record)
    return 0 if holds else EXIT_CERT


def build_parser():
    p = _Parser(prog="certctl", description="Chance-constraint probability and convexity tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("--spec", required=True, help="spec file or catalog problem name")
        sp.add_argument("--seed", type=int, default=None, help="overrides CERTCTL_SEED and the spec")

    sp = sub.add_parser("prob", help="evaluate phi(x)")
    common(sp)
    sp.add_argument("--x", help="decision vector v1,v2,...")
    sp.add_argument("--n", type=int, default=None, help="sphere points")
    sp.add_argument("--mc", type=int, default=0, help="also run direct Monte Carlo with N draws")
    sp.set_defaults(func=cmd_prob)

    sp = sub.add_parser("threshold", help="eventual-convexity threshold p*")
    common(sp)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("grid", help="phi on an n x n grid plus the convexity mask")
    common(sp)
    sp.add_argument("--box", help="x_min,x_max,y_min,y_max")
    sp.add_argument("--n", type=int, default=None, help="points per axis")
    sp.add_argument("--out", help="output path; the mask goes to PATH.mask")
    sp.set_defaults(func=cmd_grid)

    sp = sub.add_parser("verify", help="run the reference-number suite")
    sp.add_argument("--json", action="store_true", help="machine-readable output")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("certify", help="run one sampled concavity certificate")
    common(sp)
    sp.add_argument("--check", required=True,
                    choices=["g_concavity", "concave_ginv", "copula_ginv", "tstar"])
    sp.set_defaults(func=cmd_certify)
    return p


VALUE_OPTIONS = ("--x", "--box")


def _join_values(argv):
    """Turn '--box -1,1,0,2' into '--box=-1,1,0,2' so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_values(argv))
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"certctl: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RepresentationError as exc:
        print(f"certctl: representation violated: {exc}", file=sys.stderr)
        return EXIT_REPR
    except (CertificationError, TStarError) as exc:
        report = getattr(exc, "report", None)
        if isinstance(report, dict):
            _emit(report)
        elif report is not None:
            _emit(report.to_dict())
        print(f"certctl: certificate failed: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
