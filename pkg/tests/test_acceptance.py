"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured figure of merit
before asserting, so the whole gate can be read off a ``pytest -v -s`` run.
"""
import math

import numpy as np

from scramblon import brownian, exact, mqc, seft
from scramblon.brownian import KAPPA
from scramblon.core import S_SCRAMBLED, mean_size, to_continuum


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def test_figure_reproduction(big_run):
    worst = 0.0
    for kt in (4.0, 6.0, 8.0, 10.0):
        snap = big_run["snaps"][kt]
        cont = to_continuum(snap, grid_size=snap.N + 1)
        ref = brownian.analytic_late(snap.N, kt / KAPPA, grid_size=snap.N + 1)
        l1, _, _ = seft.distribution_distance(cont, ref)
        worst = max(worst, l1)
    ok = worst <= 1e-2 and big_run["wall_s"] <= 60.0
    _report(
        "figure-reproduction", ok,
        f"max L1 = {worst:.3g} (tol 1e-2), wall = {big_run['wall_s']:.1f} s "
        "(limit 60 s)",
    )
    assert ok


def test_consistency_identity():
    N = 10_000
    t0 = math.log(50.0) / KAPPA
    early, _ = brownian.analytic_early(N, t0)
    worst = 0.0
    for kt in range(4, 11):
        pred = seft.predict_late(early, KAPPA, kt / KAPPA)
        ref = brownian.analytic_late(N, kt / KAPPA, grid_size=pred.s_grid.size)
        l1, _, _ = seft.distribution_distance(pred, ref)
        worst = max(worst, l1)
    ok = worst <= 1e-2
    _report("consistency-identity", ok, f"max L1 = {worst:.3g} (tol 1e-2)")
    assert ok


def test_protocol_band(big_run):
    report = seft.run_protocol(list(big_run["snaps"].values()))
    entry = next(e for e in report.per_time if abs(KAPPA * e["t"] - 8.0) < 1e-9)
    contained = entry["band_containment"]
    ok = contained >= 0.95
    _report(
        "protocol-band", ok,
        f"containment at kt = 8 is {contained:.3f} (need >= 0.95); the "
        "finite-sbar0 systematic shifts every window prediction the same "
        "way, so the min/max band cannot cover the measured curve",
    )
    assert ok, (
        "known limitation: the relation carries an O(sbar0/s_sc) error at "
        "window ratios 0.03-0.05, larger than the band width"
    )


def test_kappa_recovery(big_run):
    fit = seft.fit_kappa([big_run["snaps"][kt] for kt in (2.0, 2.5, 3.0, 3.5)])
    ok = abs(fit.kappa - 3.0) <= 0.03
    _report("kappa-recovery", ok, f"kappa = {fit.kappa:.4f} (need 3.00 +- 0.03)")
    assert ok


def test_moment_identity():
    N = 10_000
    t0 = math.log(20.0) / KAPPA
    early, _ = brownian.analytic_early(N, t0)
    worst = 0.0
    for kt in np.arange(3.0, 12.1, 1.0):
        val = seft.predict_mean(early, KAPPA, kt / KAPPA) / S_SCRAMBLED
        ref = brownian.moment_formula(N, kt / KAPPA)
        worst = max(worst, abs(val - ref))
    ok = worst <= 1e-3
    _report("moment-identity", ok, f"max |dev| = {worst:.3g} (tol 1e-3)")
    assert ok


def test_oracle_triangle():
    t = 1.5
    worst_chain = 0.0
    worst_sigma = 0.0
    for N in (4, 5):
        chain = exact.string_chain_evolve(N, t).size_marginal()
        params = brownian.BrownianParams.for_snapshots(N, [t])
        (master,) = brownian.integrate_master(params)
        worst_chain = max(worst_chain, float(np.max(np.abs(chain.p - master.p))))
        trot = exact.trotter_brownian(N, t, 0.02, 500, seed=1)
        err = np.maximum(trot.stderr, 1e-12)
        worst_sigma = max(
            worst_sigma,
            float(np.max(np.abs(trot.p - chain.p) / err)),
            float(np.max(np.abs(trot.p - master.p) / err)),
        )
    ok = worst_chain <= 1e-6 and worst_sigma <= 3.0
    _report(
        "oracle-triangle", ok,
        f"chain-vs-master max dev = {worst_chain:.2g} (tol 1e-6), "
        f"trotter max dev = {worst_sigma:.2f} sigma (limit 3)",
    )
    assert ok


def test_dual_route_size():
    rng = np.random.default_rng(2024)
    worst = 0.0
    count = 0
    for N in (2, 3, 4):
        for _ in range(34 if N < 4 else 32):
            c = rng.normal(size=4**N)
            c[0] = 0.0
            op = exact.PauliCoefficients(N=N, c=c / np.linalg.norm(c))
            state = exact.operator_state(op.to_matrix(), N)
            a = exact.size_from_doubled_state(state, op)
            b = op.size_histogram()
            worst = max(worst, float(np.max(np.abs(a.p - b.p))))
            count += 1
    ok = worst <= 1e-12
    _report(
        "dual-route-size", ok,
        f"max dev = {worst:.2g} over {count} operators (tol 1e-12)",
    )
    assert ok


def test_invariant_suite(big_run):
    # probability conservation across the large run
    cons = max(abs(s.p.sum() - 1.0) for s in big_run["snaps"].values())
    # detailed balance of the birth-death rates
    N = 500
    r = brownian.build_rates(N)
    n = np.arange(1, N)
    db = float(np.max(np.abs(r.up[:-1] / r.down[1:] - 3.0 * (N - n) / (n + 1.0))))
    # stationary state is a fixed point of the generator
    d = brownian.stationary_distribution(200)
    resid = float(np.max(np.abs(brownian.master_rhs(brownian.build_rates(200), d.p))))
    # MQC sum rule and symmetry on an evolved small system
    M = 9
    phi = 2.0 * math.pi * np.arange(M) / M
    F, _ = exact.trotter_mqc_F(4, 1.0, 0.025, 40, seed=3, phi=phi)
    sp = mqc.mqc_spectrum_from_F(4, F, time=1.0)
    total = abs(sum(sp.I.values()) - 1.0)
    sym = max(abs(sp.I.get(m, 0.0) - sp.I.get(-m, 0.0)) for m in range(1, 5))
    ok = cons <= 1e-9 and db <= 1e-12 and resid <= 1e-8 and total <= 1e-8 and sym <= 1e-10
    _report(
        "invariant-suite", ok,
        f"conservation {cons:.2g} (1e-9), detailed balance {db:.2g} (1e-12), "
        f"stationary residual {resid:.2g} (1e-8), MQC sum {total:.2g} (1e-8), "
        f"MQC symmetry {sym:.2g} (1e-10)",
    )
    assert ok
