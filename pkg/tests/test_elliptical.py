import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special as sp, stats

from certctl.elliptical import (
    StudentRadial,
    cholesky,
    default_points,
    direct_mc_probability,
    make_elliptical,
    probability,
    sample_law,
    sphere_points,
)
from certctl.errors import DomainError, NotPositiveDefiniteError, RepresentationError
from certctl.rho import ConstraintOracle, make_rho, quadratic_oracle, quadratic_spec


def student_radial_sf(r, m, nu):
    # R^2 / m ~ F(m, nu), so P[R > r] = I_{nu/(nu + r^2)}(nu/2, m/2)
    return sp.betainc(nu / 2, m / 2, nu / (nu + np.asarray(r) ** 2))


def _quadratic_mass_1d(cov, W, lin, b):
    """P[z^T W z + lin^T z + b <= 0] for z ~ N(0, cov), integrating y | x exactly."""
    sx, sy = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    corr = cov[0, 1] / (sx * sy)
    cond_sd = sy * math.sqrt(1 - corr**2)

    def inner(x):
        a2, a1 = W[1, 1], 2 * W[0, 1] * x + lin[1]
        a0 = W[0, 0] * x * x + lin[0] * x + b
        disc = a1 * a1 - 4 * a2 * a0
        if disc <= 0:
            return 0.0
        lo, hi = (-a1 - math.sqrt(disc)) / (2 * a2), (-a1 + math.sqrt(disc)) / (2 * a2)
        mu = corr * sy / sx * x
        mass = stats.norm.cdf(hi, mu, cond_sd) - stats.norm.cdf(lo, mu, cond_sd)
        return stats.norm.pdf(x, 0, sx) * mass

    # the x-range where the y-quadratic has real roots
    c2 = (2 * W[0, 1]) ** 2 - 4 * W[1, 1] * W[0, 0]
    c1 = 2 * (2 * W[0, 1]) * lin[1] - 4 * W[1, 1] * lin[0]
    c0 = lin[1] ** 2 - 4 * W[1, 1] * b
    ends = np.sort(np.roots([c2, c1, c0]).real)
    return integrate.quad(inner, ends[0], ends[1], epsabs=1e-12, epsrel=1e-12, limit=200)[0]


class TestCholesky:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_random_spd(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((n, n))
        spd = a @ a.T + n * np.eye(n)
        low = cholesky(spd)
        assert np.allclose(low @ low.T, spd, atol=1e-10 * np.abs(spd).max())
        assert np.allclose(low, np.linalg.cholesky(spd), atol=1e-10)
        assert np.all(np.triu(low, 1) == 0)

    def test_pivot_error(self):
        with pytest.raises(NotPositiveDefiniteError) as err:
            cholesky([[1.0, 2.0], [2.0, 1.0]])
        assert err.value.pivot == 1 and err.value.value < 0

    def test_not_symmetric(self):
        with pytest.raises(DomainError):
            cholesky([[1.0, 0.5], [0.0, 1.0]])


class TestStudentRadial:
    @pytest.mark.parametrize("m,nu", [(1, 3.0), (2, 8.0), (2, 1.0), (3, 0.5), (5, 30.0)])
    def test_against_beta_oracle(self, m, nu):
        rad = StudentRadial(m, nu)
        r = math.sqrt(nu) * np.logspace(-3, 4, 400)
        sf_ref = student_radial_sf(r, m, nu)
        assert np.max(np.abs(rad.sf(r) - sf_ref)) <= 1e-9
        assert np.max(np.abs(rad.cdf(r) - (1 - sf_ref))) <= 1e-9

    @pytest.mark.parametrize("m,nu", [(2, 8.0), (4, 2.5)])
    def test_pdf_normalized_and_consistent(self, m, nu):
        rad = StudentRadial(m, nu)
        total, _ = integrate.quad(rad.pdf, 0, np.inf, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)
        r = np.linspace(0.2, 6.0, 30)
        fd = (rad.cdf(r + 1e-5) - rad.cdf(r - 1e-5)) / 2e-5
        assert np.allclose(fd, rad.pdf(r), rtol=1e-5)
        dfd = (rad.pdf(r + 1e-6) - rad.pdf(r - 1e-6)) / 2e-6
        assert np.allclose(rad.pdf_deriv(r), dfd, rtol=1e-5, atol=1e-9)

    def test_monotone_and_limits(self):
        rad = StudentRadial(2, 8.0)
        r = np.concatenate([[0.0], np.logspace(-8, 9, 20_000)])
        c = rad.cdf(r)
        assert c[0] == 0.0 and np.all(np.diff(c) >= 0) and rad.cdf(np.inf) == 1.0

    def test_quantile_round_trip(self):
        rad = StudentRadial(3, 4.0)
        p = np.linspace(1e-6, 1 - 1e-6, 301)
        assert np.max(np.abs(rad.cdf(rad.quantile(p)) - p)) <= 1e-10

    def test_invalid(self):
        with pytest.raises(DomainError):
            StudentRadial(2, 0.0)


class TestLaws:
    def test_gaussian_radial_is_chi(self):
        law = make_elliptical([0, 0, 0], np.eye(3))
        r = np.linspace(0, 6, 50)
        assert np.allclose(law.radial.cdf(r), stats.chi(3).cdf(r), atol=1e-13)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            make_elliptical([0, 0], np.eye(3))
        with pytest.raises(DomainError):
            make_elliptical([0, 0], np.eye(2), "student")
        with pytest.raises(DomainError):
            make_elliptical([0, 0], np.eye(2), "laplace")

    def test_sample_moments(self):
        cov = np.array([[2.0, 0.6], [0.6, 1.0]])
        law = make_elliptical([1.0, -1.0], cov)
        xi = sample_law(law, 200_000, np.random.default_rng(1))
        assert np.allclose(xi.mean(axis=0), [1.0, -1.0], atol=0.02)
        assert np.allclose(np.cov(xi.T), cov, atol=0.03)

    def test_student_sample_covariance(self):
        nu = 8.0
        law = make_elliptical([0.0, 0.0], np.eye(2), "student", nu)
        xi = sample_law(law, 200_000, np.random.default_rng(2))
        assert np.allclose(np.cov(xi.T), nu / (nu - 2) * np.eye(2), atol=0.05)

    def test_to_dict(self):
        law = make_elliptical([0.0, 0.0], np.eye(2), "student", 5.0)
        assert law.to_dict()["generator"] == {"student": 5.0}


class TestSpherePoints:
    def test_equal_angle(self):
        pts = sphere_points(2, 4, "equal_angle")
        assert np.array_equal(pts.points, [[1, 0], [0, 1], [-1, 0], [0, -1]])
        assert np.allclose(pts.weights.sum(), 1.0)
        with pytest.raises(DomainError):
            sphere_points(3, 10, "equal_angle")

    def test_monte_carlo_unit_and_seeded(self):
        a = sphere_points(4, 500, "monte_carlo", seed=3)
        b = sphere_points(4, 500, "monte_carlo", seed=3)
        assert np.array_equal(a.points, b.points)
        assert np.allclose(np.linalg.norm(a.points, axis=1), 1.0)

    def test_defaults(self):
        assert default_points(2).n == 720 and default_points(2).scheme == "equal_angle"
        assert default_points(3).n == 20_000 and default_points(3).scheme == "monte_carlo"

    def test_unknown_scheme(self):
        with pytest.raises(DomainError):
            sphere_points(2, 10, "sobol")


class TestProbability:
    def test_ball_is_chi_cdf(self):
        law = make_elliptical([0.0, 0.0], np.eye(2))
        spec = quadratic_spec({"constant": np.eye(2)}, [0.0, 0.0], -4.0)
        oracle = quadratic_oracle(spec)
        est = probability(law, make_rho(oracle, law), None, sphere_points(2, 16, "equal_angle"),
                          oracle)
        assert est.value == pytest.approx(stats.chi2(2).cdf(4.0), abs=1e-13)
        assert est.std_err == pytest.approx(0.0, abs=1e-14)

    def test_ellipse_against_dblquad(self):
        cov = np.array([[1.0, 0.3], [0.3, 0.5]])
        law = make_elliptical([0.0, 0.0], cov)
        W = np.array([[1.0, 0.2], [0.2, 2.0]])
        spec = quadratic_spec({"constant": W}, [0.5, -0.3], -1.0)
        oracle = quadratic_oracle(spec)
        est = probability(law, make_rho(oracle, law), None, sphere_points(2, 2000, "equal_angle"),
                          oracle)
        ref = _quadratic_mass_1d(cov, W, np.array([0.5, -0.3]), -1.0)
        assert est.value == pytest.approx(ref, abs=1e-6)

    def test_student_halfspace(self):
        # P[a^T xi <= c] for a Student vector is the univariate t cdf
        nu, cov = 6.0, np.array([[1.0, 0.4], [0.4, 2.0]])
        a, c = np.array([1.0, 1.0]), 1.3
        law = make_elliptical([0.0, 0.0], cov, "student", nu)
        oracle = ConstraintOracle(lambda x, z: z @ a - c)
        est = probability(law, make_rho(oracle, law), None, sphere_points(2, 4000, "equal_angle"),
                          oracle)
        ref = stats.t(nu).cdf(c / math.sqrt(a @ cov @ a))
        assert est.value == pytest.approx(ref, abs=1e-5)

    def test_representation_guard(self):
        law = make_elliptical([3.0, 3.0], np.eye(2))
        spec = quadratic_spec({"constant": np.eye(2)}, [0.0, 0.0], -1.0)
        oracle = quadratic_oracle(spec)
        with pytest.raises(RepresentationError):
            probability(law, make_rho(oracle, law), None, default_points(2), oracle)

    def test_direct_mc_agrees(self):
        law = make_elliptical([0.0, 0.0], np.eye(2))
        spec = quadratic_spec({"constant": np.eye(2)}, [0.0, 0.0], -2.0)
        est = direct_mc_probability(law, quadratic_oracle(spec), None, 100_000, seed=4)
        assert abs(est.value - stats.chi2(2).cdf(2.0)) <= 4 * est.std_err
        with pytest.raises(DomainError):
            direct_mc_probability(law, quadratic_oracle(spec), None, 0)
