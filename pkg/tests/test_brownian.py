import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expi

from scramblon.brownian import (
    KAPPA,
    BirthDeathRates,
    BrownianParams,
    StabilityError,
    analytic_early,
    analytic_late,
    build_rates,
    exp_integral,
    integrate_master,
    master_rhs,
    moment_formula,
    stable_dt,
    stationary_distribution,
)
from scramblon.core import SizeDistribution, mean_size, to_continuum
from scramblon.seft import distribution_distance


class TestRates:
    def test_n2_values(self):
        r = build_rates(2)
        assert r.up.tolist() == [1.5, 0.0]
        assert r.down.tolist() == [0.0, 1.0]

    def test_confinement(self):
        for N in (2, 5, 100):
            r = build_rates(N)
            assert r.up[-1] == 0.0
            assert r.down[0] == 0.0

    def test_rejects_small_N(self):
        with pytest.raises(ValueError):
            build_rates(1)

    @given(st.integers(2, 400))
    @settings(max_examples=40, deadline=None)
    def test_detailed_balance(self, N):
        # up(n) P(n) = down(n+1) P(n+1) with P(n) ~ 3^n C(N,n):
        # the ratio up(n)/down(n+1) must equal 3 (N-n)/(n+1)
        r = build_rates(N)
        n = np.arange(1, N)
        lhs = r.up[:-1] / r.down[1:]
        rhs = 3.0 * (N - n) / (n + 1.0)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_rejects_unconfined(self):
        with pytest.raises(ValueError):
            BirthDeathRates(N=2, up=np.array([1.0, 1.0]), down=np.array([0.0, 1.0]))

    def test_early_growth_rate(self):
        # d<n>/dt = sum (up - down) at P = delta_{n,1} equals up(1) = 3(N-1)/N
        N = 1000
        r = build_rates(N)
        assert r.up[0] - r.down[0] == pytest.approx(3.0 * (N - 1) / N)


class TestParams:
    def test_kappa_pinned(self):
        with pytest.raises(ValueError):
            BrownianParams(N=10, dt=1e-3, t_max=1.0, record_times=(1.0,), kappa=2.0)

    def test_record_times_bounds(self):
        with pytest.raises(ValueError):
            BrownianParams(N=10, dt=1e-3, t_max=1.0, record_times=(2.0,))

    def test_for_snapshots_stable(self):
        p = BrownianParams.for_snapshots(100, [0.5, 1.0])
        assert p.dt <= 0.1 / build_rates(100).max_rate


class TestIntegrateMaster:
    def test_stability_guard(self):
        p = BrownianParams(N=100, dt=1.0, t_max=1.0, record_times=(1.0,))
        with pytest.raises(StabilityError) as e:
            integrate_master(p)
        assert e.value.required_dt > 0

    def test_t0_snapshot_is_initial(self):
        p = BrownianParams.for_snapshots(50, [0.0])
        (snap,) = integrate_master(p)
        assert snap.p[0] == pytest.approx(1.0)

    def test_probability_conserved(self):
        p = BrownianParams.for_snapshots(200, [0.5, 1.0, 2.0])
        for snap in integrate_master(p):
            assert abs(snap.p.sum() - 1.0) < 1e-9

    def test_monotone_scrambling(self):
        p = BrownianParams.for_snapshots(200, list(np.linspace(0.2, 3.0, 8)))
        means = [mean_size(s) for s in integrate_master(p)]
        assert np.all(np.diff(means) > -1e-10)

    def test_rhs_matches_compiled_step(self):
        # one tiny Euler step of the compiled kernel against the vectorized RHS
        N = 60
        rng = np.random.default_rng(0)
        p0 = rng.random(N)
        p0 /= p0.sum()
        rates = build_rates(N)
        rhs = master_rhs(rates, p0)
        dt = 1e-7
        params = BrownianParams(N=N, dt=dt, t_max=dt, record_times=(dt,))
        (snap,) = integrate_master(
            params, SizeDistribution(N=N, p=p0)
        )
        assert np.max(np.abs((snap.p - p0) / dt - rhs)) < 1e-4

    def test_stationarity(self):
        N = 60
        pinf = stationary_distribution(N)
        params = BrownianParams.for_snapshots(N, [1.0])
        (snap,) = integrate_master(params, pinf)
        assert np.sum(np.abs(snap.p - pinf.p)) < 1e-8

    def test_large_N_convergence(self, big_run):
        # L1 to the closed form at kt = 7 shrinks as N grows
        kt = 7.0
        dists = []
        for N in (100, 1000):
            params = BrownianParams.for_snapshots(N, [kt / KAPPA])
            (snap,) = integrate_master(params)
            cont = to_continuum(snap, grid_size=N + 1)
            ana = analytic_late(N, kt / KAPPA, grid_size=N + 1)
            dists.append(distribution_distance(cont, ana)[0])
        big = big_run["snaps"][kt]
        cont = to_continuum(big, grid_size=big.N + 1)
        ana = analytic_late(big.N, kt / KAPPA, grid_size=big.N + 1)
        dists.append(distribution_distance(cont, ana)[0])
        assert dists[0] > dists[1] > dists[2]

    def test_early_growth_slope(self, big_run):
        kts = [kt for kt in big_run["snaps"] if 1.0 <= kt <= 0.5 * math.log(big_run["N"]) * KAPPA / KAPPA + 3.6]
        kts = [kt for kt in (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.6)]
        t = np.array([kt / KAPPA for kt in kts])
        logs = np.log([mean_size(big_run["snaps"][kt]) for kt in kts])
        slope = np.polyfit(t, logs, 1)[0]
        assert abs(slope - 3.0) / 3.0 < 0.01


class TestStationaryDistribution:
    def test_n1(self):
        d = stationary_distribution(1)
        assert d.p[0] == pytest.approx(1.0)

    def test_mean_near_three_quarters(self):
        assert mean_size(stationary_distribution(20)) == pytest.approx(0.75, abs=0.03)

    def test_rhs_vanishes(self):
        N = 80
        d = stationary_distribution(N)
        rates = build_rates(N)
        resid = np.max(np.abs(master_rhs(rates, d.p)))
        assert resid <= 1e-10 * rates.max_rate


class TestAnalyticForms:
    def test_early_density_at_zero(self):
        N, t0 = 10_000, 1.0
        d, s0 = analytic_early(N, t0)
        # renormalization shifts the samples by the trapezoid error O((mu h)^2)
        assert d.density[0] == pytest.approx(N * math.exp(-KAPPA * t0), rel=1e-3)
        assert s0 == pytest.approx(math.exp(KAPPA * t0) / N)

    def test_early_mean(self):
        N = 10_000
        t0 = math.log(300.0) / KAPPA
        d, s0 = analytic_early(N, t0)
        assert s0 == pytest.approx(0.03)
        assert d.mean() == pytest.approx(0.03, rel=1e-3)

    def test_early_regime_warning(self):
        with pytest.warns(RuntimeWarning):
            analytic_early(100, 2.0)

    def test_late_at_zero(self):
        N, t = 10_000, 2.0
        d = analytic_late(N, t)
        assert d.density[0] == pytest.approx(N * math.exp(-KAPPA * t), rel=1e-3)

    def test_late_vanishes_beyond_s_sc(self):
        d = analytic_late(10_000, 3.0, grid_size=2001)
        assert np.all(d.density[d.s_grid >= 0.75] == 0.0)

    def test_late_mean_matches_moment_formula(self):
        N = 10_000
        for kt in (4.0, 6.0, 9.0):
            d = analytic_late(N, kt / KAPPA, grid_size=40001)
            assert d.mean() / 0.75 == pytest.approx(
                moment_formula(N, kt / KAPPA), abs=1e-4
            )


class TestMomentFormula:
    def test_a_equals_one(self):
        # N e^{-kt} = 4/3 makes a = 1; value 1 + e Ei(-1)
        N = 10_000
        t = math.log(3.0 * N / 4.0) / KAPPA
        assert moment_formula(N, t) == pytest.approx(0.40365263767680595, abs=1e-12)

    def test_scrambled_limit(self):
        assert moment_formula(100, 50.0) == pytest.approx(1.0, abs=1e-12)

    def test_large_a_asymptotics(self):
        # a e^a Ei(-a) -> -1 + 1/a - ..., so the ratio -> 1/a
        N = 10_000
        t = 0.0
        a = 0.75 * N
        val = moment_formula(N, t)
        assert val == pytest.approx(1.0 / a, rel=2e-3)

    def test_matches_simulation(self, big_run):
        for kt in (4.0, 6.0, 8.0):
            snap = big_run["snaps"][kt]
            assert mean_size(snap) / 0.75 == pytest.approx(
                moment_formula(big_run["N"], kt / KAPPA), abs=2e-3
            )


class TestExpIntegral:
    def test_reference_value(self):
        assert exp_integral(-1.0) == pytest.approx(-0.21938393439552026, abs=1e-14)

    def test_decay(self):
        v = exp_integral(-100.0)
        assert -1e-45 < v < 0.0

    def test_leading_asymptotics(self):
        # x e^x |Ei(-x)| -> 1; at x = 1000 the two factors over/underflow
        # doubles, so check through the scaled continued fraction
        from scramblon.brownian import _e1_scaled_cf

        assert 1000.0 * _e1_scaled_cf(1000.0) == pytest.approx(1.0, abs=1e-2)
        x = 600.0
        assert x * math.exp(x) * abs(exp_integral(-x)) == pytest.approx(1.0, abs=1e-2)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            exp_integral(0.5)

    @given(st.floats(1e-6, 700.0))
    @settings(max_examples=200, deadline=None)
    def test_against_scipy(self, x):
        ours = exp_integral(-x)
        ref = expi(-x)
        if ref == 0.0:
            assert abs(ours) < 1e-300
        else:
            assert abs(ours - ref) <= 1e-12 * abs(ref) + 1e-300
