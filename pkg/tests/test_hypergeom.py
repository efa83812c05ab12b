import math

import numpy as np
import pytest

from cge.hypergeom import (DIVERGED, CapacityLaplaceParams,
                           LogarithmicCaseError, blowup_boundary,
                           capacity_laplace, f_and_g, gauss_2f1,
                           lambda_floor, laplace_at_u, laplace_at_u_minus1,
                           mean_small_u_exponent, small_u_exponent)


def series_2f1(a, b, c, z, terms=10000):
    """Direct power-series oracle."""
    total = 1.0
    term = 1.0
    for n in range(terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    return total


class TestGauss2F1:
    def test_at_zero(self):
        assert gauss_2f1(0.3, -1.7, 0.9, 0.0) == 1.0

    def test_log_identity(self):
        # 2F1(1,1;2;z) = -log(1-z)/z
        z = 0.5
        assert gauss_2f1(1, 1, 2, z) == pytest.approx(2 * math.log(2), rel=1e-12)

    @pytest.mark.parametrize("kappa,lam", [(2.0, 0.25), (0.5, 0.3), (3.0, 0.1),
                                           (6.0, 0.2), (1.3, -0.1)])
    def test_against_series_oracle(self, kappa, lam):
        p = CapacityLaplaceParams(kappa, lam)
        for z in (0.05, 0.3, 0.6):
            assert gauss_2f1(p.a, p.b, p.c, z) == pytest.approx(
                series_2f1(p.a, p.b, p.c, z), rel=1e-10)

    def test_parameter_error(self):
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 0.5, -1.0, 0.3)
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 0.5, 0.5, 1.0)

    def test_ode_residual(self):
        """-ab f + (c-(a+b+1)z) f' + z(1-z) f'' = 0 with FD derivatives."""
        rng = np.random.default_rng(12)
        h = 1e-4
        for _ in range(40):
            kappa = rng.uniform(0.3, 7.5)
            lam = rng.uniform(-0.05, max(0.01, blowup_boundary(kappa) - 0.05))
            p = CapacityLaplaceParams(kappa, lam)
            if p.c_is_integer or p.discriminant < 1e-4:
                continue
            a, b, c = p.a, p.b, p.c
            z = rng.uniform(0.05, 0.7)
            f0 = gauss_2f1(a, b, c, z)
            fp = (gauss_2f1(a, b, c, z + h) - gauss_2f1(a, b, c, z - h)) / (2 * h)
            fpp = (gauss_2f1(a, b, c, z + h) - 2 * f0
                   + gauss_2f1(a, b, c, z - h)) / h ** 2
            terms = [-a * b * f0, (c - (a + b + 1) * z) * fp,
                     z * (1 - z) * fpp]
            resid = sum(terms)
            scale = max(1.0, max(abs(t) for t in terms))
            assert abs(resid) < 1e-6 * scale


class TestFAndG:
    def test_values_at_zero(self):
        p = CapacityLaplaceParams(2.0, 0.25)
        f0, g0 = f_and_g(p, 0.0)
        assert f0 == 1.0
        assert g0 == 0.0

    def test_f1_cosine_value(self):
        # kappa=2, lambda=0.25: f(1) = cos(pi sqrt 2)/cos(-pi)
        p = CapacityLaplaceParams(2.0, 0.25)
        f1, g1 = f_and_g(p, 1.0)
        cosine = math.cos(math.pi * math.sqrt(2.0)) / math.cos(-math.pi)
        assert f1 == pytest.approx(cosine, rel=1e-12)
        assert g1 > 0.0

    def test_f1_finite_and_g1_positive(self):
        # g(1) in (0, inf) holds throughout (both gamma products are
        # positive for a < 1, c < 1). The textbook interval [-1, 1) for
        # f(1) is false in general: the cosine form exceeds 1 in modulus
        # for some (kappa, lambda), confirmed against mpmath; what matters
        # for the transform is that the combination stays a Laplace
        # transform, i.e. E >= 1, checked on the same samples.
        rng = np.random.default_rng(8)
        for _ in range(60):
            kappa = rng.uniform(0.2, 7.8)
            lam = rng.uniform(1e-3, blowup_boundary(kappa) - 1e-3)
            p = CapacityLaplaceParams(kappa, lam)
            if p.c_is_integer:
                continue
            f1, g1 = f_and_g(p, 1.0)
            assert np.isfinite(f1)
            assert 0.0 < g1 < math.inf
            for u in (0.2, 0.5, 0.8):
                assert laplace_at_u(kappa, lam, u) >= 1.0 - 1e-9

    def test_f1_interval_at_kappa_two(self):
        # at kappa = 2 the cosine form is -cos(pi sqrt(1 + 4 lam)), which
        # stays in (-1, 1) across the whole finite range
        for lam in (0.01, 0.1, 0.25, 0.5, 0.7, 0.74):
            f1, _ = f_and_g(CapacityLaplaceParams(2.0, lam), 1.0)
            assert -1.0 <= f1 < 1.0

    def test_gamma_closed_form_matches_series_limit(self):
        """f(1) from gammas equals the series evaluated close to 1."""
        p = CapacityLaplaceParams(3.0, 0.15)
        f1, _ = f_and_g(p, 1.0)
        f_near = series_2f1(p.a, p.b, p.c, 1.0 - 1e-7, terms=2000000)
        assert f1 == pytest.approx(f_near, rel=1e-3)

    def test_integer_c_nudge(self):
        p = CapacityLaplaceParams(8.0 / 3.0, 0.2)
        assert p.c_is_integer
        f, g = f_and_g(p, 0.4)
        assert np.isfinite(f) and np.isfinite(g)

    def test_kappa_zero_rejected(self):
        with pytest.raises(ValueError):
            f_and_g(CapacityLaplaceParams(0.0, 0.5), 0.3)


class TestCapacityLaplace:
    def test_theta_to_zero_limit(self):
        p = CapacityLaplaceParams(2.0, 0.25)
        vals = [capacity_laplace(p, th) for th in (0.3, 0.1, 0.03, 0.01)]
        gaps = [v - 1.0 for v in vals]
        assert all(g > 0 for g in gaps)
        assert gaps[-1] < 1e-3
        assert gaps == sorted(gaps, reverse=True)

    def test_symmetry_in_theta(self):
        p = CapacityLaplaceParams(2.0, 0.25)
        for th in (0.5, 1.2, 2.4):
            assert capacity_laplace(p, th) == pytest.approx(
                capacity_laplace(p, 2 * np.pi - th), rel=1e-10)

    def test_divergence_signal(self):
        p = CapacityLaplaceParams(2.0, 0.76)
        assert capacity_laplace(p, np.pi) == DIVERGED

    def test_at_least_one(self):
        for kappa in (0.0, 1.0, 2.5, 3.7):
            lam = 0.5 * blowup_boundary(kappa)
            p = CapacityLaplaceParams(kappa, lam)
            for th in np.linspace(0.1, 2 * np.pi - 0.1, 17):
                assert capacity_laplace(p, th) >= 1.0 - 1e-12

    def test_increasing_in_lambda(self):
        th = 2.0
        for kappa in (1.0, 2.0, 3.0):
            lams = np.linspace(0.02, blowup_boundary(kappa) - 0.02, 9)
            vals = [capacity_laplace(CapacityLaplaceParams(kappa, l), th)
                    for l in lams]
            assert all(v2 > v1 for v1, v2 in zip(vals, vals[1:]))

    def test_continuity_across_integer_c(self):
        for kc in (8.0 / 3.0, 8.0 / 5.0):
            lam = 0.25 * blowup_boundary(kc)
            lo = laplace_at_u(kc * (1 - 1e-4), lam, 0.3)
            mid = laplace_at_u(kc, lam, 0.3)
            hi = laplace_at_u(kc * (1 + 1e-4), lam, 0.3)
            assert abs(hi - lo) < 1e-2
            assert min(lo, hi) - 1e-3 <= mid <= max(lo, hi) + 1e-3

    def test_kappa_zero_closed_form(self):
        # deterministic capacity -log|cos(theta/2)|
        p = CapacityLaplaceParams(0.0, 0.5)
        th = 1.0
        expect = abs(math.cos(th / 2)) ** -0.5
        assert capacity_laplace(p, th) == pytest.approx(expect, rel=1e-14)

    def test_minus_one_form_no_cancellation(self):
        p = (2.0, 0.25)
        for u in (1e-10, 1e-7, 1e-4):
            v = laplace_at_u_minus1(*p, u)
            assert v > 0.0
            # leading order is the u-branch for kappa < 8/3
            assert v == pytest.approx(laplace_at_u_minus1(*p, 2 * u) / 2,
                                      rel=0.02)


class TestSmallU:
    def test_branches(self):
        assert small_u_exponent(2.0) == 1.0
        assert small_u_exponent(6.0) == pytest.approx(1.0 - (1.5 - 4.0 / 6.0))
        # kappa=6: 1-c = 1 - (3/2 - 2/3) = 1/6
        assert small_u_exponent(6.0) == pytest.approx(1.0 / 6.0)

    def test_logarithmic_case(self):
        with pytest.raises(LogarithmicCaseError):
            small_u_exponent(8.0 / 3.0)

    def test_mean_exponent_at_zero(self):
        assert mean_small_u_exponent(0.0) == 1.0

    @pytest.mark.parametrize("kappa", [2.0, 3.0, 6.0])
    def test_fitted_slope_matches(self, kappa):
        """log-log slope of E[exp(lam cap)]-1 vs theta matches 2p within 5%."""
        lam = 0.25 * blowup_boundary(kappa)
        p = small_u_exponent(kappa)
        thetas = np.geomspace(1e-3, 1e-2, 7)
        us = np.sin(thetas / 4) ** 2
        vals = np.array([laplace_at_u_minus1(kappa, lam, u) for u in us])
        slope = np.polyfit(np.log(thetas), np.log(vals), 1)[0]
        assert slope == pytest.approx(2.0 * p, rel=0.05)

    def test_lambda_floor(self):
        assert lambda_floor(2.0) == pytest.approx(-0.25)
        p = CapacityLaplaceParams(2.0, -0.3)
        with pytest.raises(ValueError):
            p.validate_real()
