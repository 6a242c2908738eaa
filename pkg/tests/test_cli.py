import json
import math

import numpy as np
import pytest
import yaml
from scipy import stats

from certctl import catalog
from certctl.cli import main

SHIFTED = {
    "name": "shifted",
    "model": "elliptical_quadratic",
    "law": {"mean": [3.0, 3.0], "cov": [[1.0, 0.0], [0.0, 1.0]]},
    "constraint": {"W": {"constant": [[1.0, 0.0], [0.0, 1.0]]}, "linear": [0.0, 0.0],
                   "offset": -1.0},
}
THREE_D = {
    "name": "three-d",
    "model": "elliptical_quadratic",
    "law": {"mean": [0.0, 0.0, 0.0], "cov": np.diag([1.0, 2.0, 3.0]).tolist()},
    "constraint": {"W": {"linear": [np.eye(3).tolist()] * 3}, "linear": [0.0, 0.0, 0.0],
                   "offset": -1.0},
    "integration": {"scheme": "monte_carlo", "n": 2000, "seed": 11},
}


def write(tmp_path, raw, name="spec.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def record(out):
    lines = [ln for ln in out.splitlines() if ln.strip()]
    assert len(lines) == 1, out
    return json.loads(lines[0])


class TestProb:
    def test_quadratic_instance_matches_mc(self, capsys):
        code, out, err = run(capsys, "prob", "--spec", "paper-quadratic-2d", "--x", "1,1",
                             "--mc", "100000", "--seed", "3")
        assert code == 0 and err == ""
        rec = record(out)
        assert 0 <= rec["phi"] <= 1 and rec["n"] == 720
        mc = rec["direct_mc"]
        assert abs(rec["phi"] - mc["phi"]) <= 3 * math.hypot(rec["std_err"], mc["std_err"])

    def test_representation_violated(self, capsys, tmp_path):
        code, out, err = run(capsys, "prob", "--spec", write(tmp_path, SHIFTED), "--x", "0,0")
        assert code == 3 and out == "" and "representation" in err

    def test_never_binding_is_one(self, capsys):
        code, out, _ = run(capsys, "prob", "--spec", "never-binding", "--x", "0,0")
        assert code == 0 and record(out)["phi"] == 1.0

    def test_always_infeasible_is_zero(self, capsys):
        code, out, _ = run(capsys, "prob", "--spec", "always-infeasible", "--x", "0,0")
        assert code == 0 and record(out)["phi"] == 0.0

    def test_separable(self, capsys):
        code, out, _ = run(capsys, "prob", "--spec", "zadeh-khorram-ex1", "--x", "0.2,-0.1")
        assert code == 0
        h1 = math.exp(-(0.1**3))
        h2 = 1 / (0.04 + 0.01 + 1)
        ref = stats.norm.cdf(h1) * stats.chi(2).cdf(h2)
        assert record(out)["phi"] == pytest.approx(ref, rel=1e-12)

    def test_halfspace_closed_form(self, capsys):
        code, out, _ = run(capsys, "prob", "--spec", "halfspace", "--x", "0.5,0.5", "--n", "4000")
        assert code == 0
        rec = record(out)
        cov = np.asarray(catalog.SIGMA_CUSTOM)
        a = np.array([1.0, 2.0])
        ref = stats.norm.cdf((0.5 + 0.5) / math.sqrt(a @ cov @ a))
        assert rec["phi"] == pytest.approx(ref, abs=1e-5)

    @pytest.mark.parametrize("argv", [
        ["prob", "--spec", "paper-quadratic-2d", "--x", "1,2,3"],
        ["prob", "--spec", "paper-quadratic-2d", "--x", "a,b"],
        ["prob", "--spec", "paper-quadratic-2d"],
        ["prob", "--spec", "no-such-problem", "--x", "1,1"],
        ["prob", "--x", "1,1"],
        ["frobnicate"],
        ["certify", "--spec", "zadeh-khorram-ex1", "--check", "hessian"],
    ])
    def test_parse_errors(self, capsys, argv):
        code = None
        try:
            code = main(argv)
        except SystemExit as exc:
            code = exc.code
        assert code == 2

    def test_unknown_key_is_parse_error(self, capsys, tmp_path):
        raw = dict(SHIFTED, law={"mean": [0, 0], "cov": [[1, 0], [0, 1]], "covariance": 1})
        code, out, err = run(capsys, "prob", "--spec", write(tmp_path, raw), "--x", "0,0")
        assert code == 2 and "covariance" in err

    def test_dimension_mismatch_is_parse_error(self, capsys, tmp_path):
        raw = dict(SHIFTED, law={"mean": [0, 0, 0], "cov": np.eye(3).tolist()})
        code, _, _ = run(capsys, "prob", "--spec", write(tmp_path, raw), "--x", "0,0")
        assert code == 2

    def test_bad_yaml(self, capsys, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("name: [unclosed\n")
        code, _, _ = run(capsys, "prob", "--spec", str(path), "--x", "0,0")
        assert code == 2


class TestSeeds:
    def test_priority(self, capsys, tmp_path, monkeypatch):
        path = write(tmp_path, THREE_D)

        def phi(*extra):
            code, out, _ = run(capsys, "prob", "--spec", path, "--x", "1,1,1", *extra)
            assert code == 0
            return record(out)

        from_spec = phi()
        assert from_spec["seed"] == 11
        monkeypatch.setenv("CERTCTL_SEED", "5")
        from_env = phi()
        assert from_env["seed"] == 5 and from_env["phi"] != from_spec["phi"]
        from_cli = phi("--seed", "11")
        assert from_cli == from_spec

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("CERTCTL_SEED", "abc")
        code, _, _ = run(capsys, "prob", "--spec", "paper-quadratic-2d", "--x", "1,1")
        assert code == 2


class TestThreshold:
    def test_quadratic_routes(self, capsys):
        code, out, err = run(capsys, "threshold", "--spec", "paper-quadratic-2d")
        assert code == 0 and err == ""
        routes = {r["route"]: r for r in record(out)["reports"]}
        assert routes["gaussian_refined"]["p_star"] == pytest.approx(0.9873, abs=5e-5)
        q = routes["elliptical_q_formula"]
        assert q["p_star"] >= routes["gaussian_refined"]["p_star"]
        assert q["t_star"] == pytest.approx(math.sqrt(5))

    def test_student(self, capsys):
        code, out, _ = run(capsys, "threshold", "--spec", "paper-quadratic-student")
        assert code == 0
        rep = record(out)["reports"][0]
        # f/G' for the Student radial law with G = t^-3 peaks at sqrt(nu)
        assert rep["t_star"] == pytest.approx(math.sqrt(8.0), abs=1e-7)

    def test_copula_examples(self, capsys):
        code, out, _ = run(capsys, "threshold", "--spec", "zadeh-khorram-ex1")
        assert code == 0
        rec = record(out)
        assert rec["reports"][0]["p_star"] == pytest.approx(0.9686, abs=5e-5)
        assert all(c["holds"] for c in rec["certificates"])
        code, out, _ = run(capsys, "threshold", "--spec", "zadeh-khorram-ex1-g0")
        rec = record(out)
        assert code == 0
        assert rec["reports"][0]["p_star"] == pytest.approx(0.9497, abs=5e-5)
        assert rec["prior_work"]["p_star"] == pytest.approx(0.9987, abs=5e-5)

    def test_failed_certificate(self, capsys):
        code, out, err = run(capsys, "threshold", "--spec", "exp-rayleigh")
        assert code == 4 and "certificate failed" in err
        assert any(not c["holds"] for c in record(out)["certificates"])

    def test_custom_needs_t_star(self, capsys):
        assert run(capsys, "threshold", "--spec", "halfspace")[0] == 2

    def test_negative_values_after_options(self, capsys):
        code, out, _ = run(capsys, "prob", "--spec", "paper-quadratic-2d", "--x", "-1,-0.5")
        assert code == 0 and record(out)["x"] == [-1.0, -0.5]
        code, out, _ = run(capsys, "threshold", "--spec", "ball")
        assert code == 0 and record(out)["reports"][0]["t_star"] == 2.0


class TestGrid:
    def test_single_cell(self, capsys, tmp_path):
        out_path = str(tmp_path / "g.csv")
        code, out, _ = run(capsys, "grid", "--spec", "paper-quadratic-2d", "--box", "0,1,0,1",
                           "--n", "2", "--out", out_path)
        assert code == 0
        lines = open(out_path).read().splitlines()
        assert lines[0] == "x1,x2,phi" and len(lines) == 5
        vals = np.loadtxt(out_path, delimiter=",", skiprows=1)
        assert np.all((vals[:, 2] >= 0) & (vals[:, 2] <= 1))
        mask = open(out_path + ".mask").read().splitlines()
        assert mask[0] == "x1,x2,mask" and len(mask) == 5
        assert {ln.rsplit(",", 1)[1] for ln in mask[1:]} <= {"0", "1"}
        assert record(out)["rows"] == 4

    def test_deterministic(self, capsys, tmp_path):
        paths = [str(tmp_path / f"g{i}.csv") for i in range(2)]
        for p in paths:
            assert run(capsys, "grid", "--spec", "paper-quadratic-2d", "--box", "-1,1,0,2",
                       "--n", "6", "--out", p)[0] == 0
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()
        assert open(paths[0] + ".mask", "rb").read() == open(paths[1] + ".mask", "rb").read()

    def test_infeasible_stub(self, capsys, tmp_path):
        out_path = str(tmp_path / "z.csv")
        code, _, _ = run(capsys, "grid", "--spec", "always-infeasible", "--box", "0,1,0,1",
                         "--n", "3", "--out", out_path)
        assert code == 0
        assert np.all(np.loadtxt(out_path, delimiter=",", skiprows=1)[:, 2] == 0.0)

    def test_ball_mask_all_ones(self, capsys, tmp_path):
        # the ball of radius 1.5 never reaches t* = 2 so no x is in the mask
        out_path = str(tmp_path / "b.csv")
        code, out, _ = run(capsys, "grid", "--spec", "ball", "--box", "0,1,0,1", "--n", "2",
                           "--out", out_path)
        assert code == 0 and record(out)["mask_count"] == 0

    def test_non_2d(self, capsys, tmp_path):
        code, _, err = run(capsys, "grid", "--spec", write(tmp_path, THREE_D), "--box", "0,1,0,1",
                           "--n", "2", "--out", str(tmp_path / "x.csv"))
        assert code == 5 and err

    def test_bad_box(self, capsys, tmp_path):
        code, _, _ = run(capsys, "grid", "--spec", "paper-quadratic-2d", "--box", "1,0,0,1",
                         "--n", "2", "--out", str(tmp_path / "x.csv"))
        assert code == 2


class TestCertify:
    def test_tstar_exotic(self, capsys):
        code, out, _ = run(capsys, "certify", "--spec", "zadeh-khorram-ex1", "--check", "tstar")
        assert code == 0
        assert record(out)["t_star"] == pytest.approx(1.67597, abs=1e-5)

    def test_chi2_interval_holds(self, capsys):
        code, out, _ = run(capsys, "certify", "--spec", "zadeh-khorram-ex1", "--check",
                           "concave_ginv")
        rec = record(out)
        assert code == 0 and rec["holds"] and rec["worst_violation"] <= 1e-9

    def test_g_concavity_and_copula(self, capsys):
        for check in ("g_concavity", "copula_ginv"):
            code, out, _ = run(capsys, "certify", "--spec", "zadeh-khorram-ex1", "--check", check)
            assert code == 0 and record(out)["holds"]

    def test_exp_cube_fails_with_witness(self, capsys):
        code, out, err = run(capsys, "certify", "--spec", "exp-cube-alpha", "--check",
                             "g_concavity")
        rec = record(out)
        assert code == 4 and not rec["holds"] and len(rec["witness"]) == 3

    def test_sinc2_oscillation(self, capsys):
        code, out, err = run(capsys, "certify", "--spec", "exp-cube-alpha", "--check", "tstar")
        assert code == 4 and "sign" in err.lower()

    def test_missing_section(self, capsys):
        code, _, _ = run(capsys, "certify", "--spec", "exp-pow-ratio", "--check", "tstar")
        assert code == 2


class TestVerify:
    def test_table_and_exit(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert "expected" in out and "passed" in out
        assert code in (0, 1)
        code_json, out_json, _ = run(capsys, "verify", "--json")
        rows = record(out_json)["rows"]
        assert len(rows) >= 12
        assert code == code_json == (0 if all(r["status"] == "PASS" for r in rows) else 1)
