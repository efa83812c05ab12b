import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cge.capacity import (EPS_ABS, T_MAX, McLaplaceResult, ThetaPath,
                          coupled_pair, mc_capacity_laplace,
                          mean_capacity_table, sample_capacity,
                          sample_capacity_batch)
from cge.hypergeom import CapacityLaplaceParams, capacity_laplace


class TestSampleCapacity:
    def test_already_absorbed(self):
        p = sample_capacity(2.0, EPS_ABS / 2, 1)
        assert p.hitting_time == 0.0
        assert p.absorbed_at == "zero"
        p = sample_capacity(2.0, 2 * np.pi - EPS_ABS / 2, 1)
        assert p.hitting_time == 0.0
        assert p.absorbed_at == "two_pi"

    def test_kappa0_matches_ode_oracle(self):
        """RK4 sampler vs an independent high-order ODE solve to absorption.

        Both integrate d theta = -2 cot(theta/2) dt; the flow reaches the
        boundary only asymptotically, so the oracle is integrated to the
        same absorption tolerance.
        """
        theta0 = 1.0
        got = sample_capacity(0.0, theta0, 1, step_base=0.001).hitting_time

        def rhs(t, y):
            return [-2.0 / math.tan(0.5 * y[0])]

        def hit(t, y):
            return y[0] - EPS_ABS
        hit.terminal = True
        hit.direction = -1
        sol = solve_ivp(rhs, [0, 100], [theta0], events=hit,
                        rtol=1e-10, atol=1e-12)
        oracle = sol.t_events[0][0]
        assert got == pytest.approx(oracle, abs=1e-4)
        # closed form of the flow: T = -log cos(theta0/2) at zero tolerance
        assert got == pytest.approx(-math.log(math.cos(theta0 / 2)), abs=1e-4)

    def test_kappa0_cap_flag(self):
        p = sample_capacity(0.0, np.pi, 1)
        assert p.capped and p.hitting_time == T_MAX

    def test_mean_stability(self):
        """Two half-sample means agree within 3 combined standard errors."""
        t, _, _ = sample_capacity_batch(2.0, np.pi, 100000, 5)
        a, b = t[:50000], t[50000:]
        se = math.hypot(a.std(ddof=1) / np.sqrt(a.size),
                        b.std(ddof=1) / np.sqrt(b.size))
        assert abs(a.mean() - b.mean()) < 3 * se
        assert np.isfinite(t.mean())

    def test_seed_determinism(self):
        a = sample_capacity(2.0, 1.5, 42, key=(3,))
        b = sample_capacity(2.0, 1.5, 42, key=(3,))
        assert a == b
        c = sample_capacity(2.0, 1.5, 42, key=(4,))
        assert c.hitting_time != a.hitting_time

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_capacity(8.0, 1.0, 1)
        with pytest.raises(ValueError):
            sample_capacity(2.0, 0.0, 1)

    def test_monotone_coupling(self):
        """Shared noise: starting closer to pi gives larger hitting times."""
        rng_keys = range(10000)
        diffs = []
        from cge._rng import xoshiro_state
        for k in rng_keys:
            st = xoshiro_state(99, (k,))
            ta, tb = coupled_pair(2.0, 2.0, np.pi, st)
            diffs.append(tb - ta)
        diffs = np.array(diffs)
        # empirical mean ordering, strongly positive
        assert diffs.mean() > 3 * diffs.std(ddof=1) / np.sqrt(diffs.size)

    def test_absorption_at_two_pi_vanishes_for_small_theta(self):
        fracs = []
        for th in (2.0, 1.0, 0.5, 0.25):
            _, sides, _ = sample_capacity_batch(2.0, th, 4000, 7,
                                                key=(int(th * 100),))
            fracs.append(sides.mean())
        assert all(f2 < f1 for f1, f2 in zip(fracs, fracs[1:]))
        assert fracs[-1] < 0.01


class TestMcLaplace:
    def test_lambda_zero_exact(self):
        r = mc_capacity_laplace(2.0, 0.0, np.pi, 100, 1)
        assert r.estimate == 1.0 and r.stderr == 0.0

    def test_matches_analytic(self):
        ana = capacity_laplace(CapacityLaplaceParams(2.0, 0.25), np.pi)
        r = mc_capacity_laplace(2.0, 0.25, np.pi, 100000, 314,
                                step_base=0.005)
        assert abs(r.estimate - ana) <= 3 * r.stderr

    def test_quadratic_small_theta_decay(self):
        """(E - 1) ratio between theta 0.2 and 0.1 near 4 (u-branch)."""
        r2 = mc_capacity_laplace(2.0, 0.25, 0.2, 200000, 41)
        r1 = mc_capacity_laplace(2.0, 0.25, 0.1, 200000, 42)
        ratio = (r2.estimate - 1.0) / (r1.estimate - 1.0)
        assert ratio == pytest.approx(4.0, rel=0.25)

    def test_divergence_warning(self):
        r = mc_capacity_laplace(2.0, 0.8, np.pi, 200, 1)
        assert r.moment_diverges

    def test_records_step_base(self):
        r = mc_capacity_laplace(2.0, 0.1, 1.0, 50, 1, step_base=0.02)
        assert r.step_base == 0.02
        est, se = r
        assert est == r.estimate and se == r.stderr


class TestMeanTable:
    def test_kappa0_deterministic(self):
        thetas = [0.5, 1.0, 2.0]
        means, errs = mean_capacity_table(0.0, thetas, 1, 1)
        exact = [-math.log(abs(math.cos(t / 2))) for t in thetas]
        assert np.allclose(means, exact, atol=1e-3)
        assert np.all(errs == 0.0)
