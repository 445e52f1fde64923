"""End-to-end acceptance suite: seven numbered criteria, one summary line
each (printed in the terminal summary via conftest)."""

import math
from itertools import product

import numpy as np

import conftest
from smrls.channel import SpectralModel, rayleigh_r_transform, sample_rayleigh, add_awgn
from smrls.codebook import build_codebook
from smrls.constellation import bpsk, ssk
from smrls.detect import (
    Box,
    map_regularizer_constants,
    prox_box_soft_threshold,
    solve_l0_exhaustive,
)
from smrls.harness.config import (
    DetectorConfig,
    build_system,
    detector_spec,
    example3_config,
    example4_config,
)
from smrls.harness.figures import fig_map_bound
from smrls.harness.montecarlo import compare_replica_mc, run_monte_carlo
from smrls.rate import per_antenna_rate
from smrls.replica.decoupled import (
    BoxLassoSpec,
    DecoupledInput,
    GenericSpec,
    L0Spec,
    scalar_rls,
    tau_theta,
)
from smrls.replica.fixed_point import solve_fixed_point
from smrls.replica.functionals import functionals
from smrls.replica.tuning import tune
from smrls.stats import codebook_marginal, empirical_stats

from oracles import mc_box_lasso_atom, mc_l0_atom

SIGMA2 = 10.0 ** -1.1
SPECTRAL = rayleigh_r_transform(0.5)
DEC_SSK = DecoupledInput(0.125, ssk())
LAM_GRID = list(np.round(np.linspace(0.02, 0.66, 17), 4))


def record(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def db(v):
    return 10.0 * math.log10(v)


def test_criterion_1_benchmark_monte_carlo_mse():
    config = example4_config(trials=1000)
    results = {}
    for lam in (0.56, 0.06):
        det = detector_spec(DetectorConfig("classic-lasso", lam=lam), config.power)
        agg = run_monte_carlo(config, det, "mse", n_jobs=4, keep_values=False)
        results[lam] = db(agg.mean)
    gap = results[0.06] - results[0.56]
    ok = (
        abs(results[0.56] - (-20.73)) <= 0.4
        and abs(results[0.06] - (-16.73)) <= 0.4
        and abs(gap - 4.0) <= 0.6
    )
    record(
        1, ok,
        f"MSE(0.56)={results[0.56]:.2f} dB (want -20.73±0.4), "
        f"MSE(0.06)={results[0.06]:.2f} dB (want -16.73±0.4), "
        f"gap={gap:.2f} dB (want 4±0.6), 1000 trials",
    )


def test_criterion_2_replica_tracks_monte_carlo():
    config = example4_config(trials=1000)
    lam_grid = list(np.round(np.linspace(0.05, 0.5, 10), 4))
    rows, max_dev_db = compare_replica_mc(
        config, lam_grid, box=Box(0.0, 1.0), metric="mse"
    )
    ok = max_dev_db <= 0.5 and len(rows) == 10
    record(
        2, ok,
        f"box-LASSO replica vs MC over {len(rows)} lambdas, 1000 trials: "
        f"max |deviation| = {max_dev_db:.3f} dB (want <= 0.5)",
    )


def test_criterion_3_tuning_reproduction():
    box = tune(lambda l: BoxLassoSpec(l, 0.0, 1.0), SPECTRAL, SIGMA2, DEC_SSK,
               "error-rate", LAM_GRID)
    classic = tune(lambda l: BoxLassoSpec(l), SPECTRAL, SIGMA2, DEC_SSK,
                   "error-rate", LAM_GRID)
    ok = (
        0.15 <= box.lam_star <= 0.19
        and 1.9e-4 / 1.5 <= box.metric_star <= 1.9e-4 * 1.5
        and 0.19 <= classic.lam_star <= 0.22
        and 3.1e-4 / 1.5 <= classic.metric_star <= 3.1e-4 * 1.5
    )
    orderings_ok = True
    for snr_db in np.linspace(5.0, 13.0, 9):
        sigma2 = 10.0 ** (-snr_db / 10.0)
        b = tune(lambda l: BoxLassoSpec(l, 0.0, 1.0), SPECTRAL, sigma2, DEC_SSK,
                 "error-rate", LAM_GRID)
        c = tune(lambda l: BoxLassoSpec(l), SPECTRAL, sigma2, DEC_SSK,
                 "error-rate", LAM_GRID)
        a_reg, _ = map_regularizer_constants(sigma2, DEC_SSK.eta, 0)
        m = solve_fixed_point(L0Spec(a_reg, DEC_SSK.constellation), SPECTRAL,
                              sigma2, DEC_SSK)
        slack = 1e-12
        if not (b.metric_star <= c.metric_star * (1 + 1e-9) + slack):
            orderings_ok = False
        # The exhaustive-search curve uses an exact decision while the LASSO
        # errors depend on the threshold epsilon = sqrt(P)/2; at low SNR the
        # tuned box-LASSO error can dip below it by ~1e-4 relative, so the
        # ordering is checked up to that threshold-induced wobble.
        if not (m.error_rate <= min(b.metric_star, c.metric_star) * (1 + 1e-3) + slack):
            orderings_ok = False
    record(
        3, ok and orderings_ok,
        f"box lam*={box.lam_star:.4f} err={box.metric_star:.2e} "
        f"(want [0.15,0.19], 1.9e-4 x1.5); "
        f"classic lam*={classic.lam_star:.4f} err={classic.metric_star:.2e} "
        f"(want [0.19,0.22], 3.1e-4 x1.5); "
        f"box<=classic and MAP<=both over 5-13 dB: {orderings_ok}",
    )


TOY_SUPPORTS = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4)]


def test_criterion_4_transmit_statistics():
    config = example3_config()
    codebook, constellation = build_system(config)
    stats = empirical_stats(codebook, constellation, config.k_users, 80,
                            100_000, seed=42)
    want = {-1.0 + 0j: 0.0625, 0j: 0.875, 1.0 + 0j: 0.0625}
    emp_ok = all(abs(stats.marginal[v] - p) <= 0.01 for v, p in want.items())

    toy = build_codebook(5, 2, policy="explicit", supports=TOY_SUPPORTS)
    m1 = codebook_marginal(toy, bpsk(), 1)
    m5 = codebook_marginal(toy, bpsk(), 5)
    exact_ok = (
        m1[0j] == 0.5 and m1[1 + 0j] == 0.25 and m1[-1 + 0j] == 0.25
        and m5[0j] == 0.75 and m5[1 + 0j] == 0.125 and m5[-1 + 0j] == 0.125
    )
    emp = tuple(round(stats.marginal[v], 5) for v in (-1 + 0j, 0j, 1 + 0j))
    record(
        4, emp_ok and exact_ok,
        f"entry-80 marginal {emp} within ±0.01 of (0.0625, 0.875, 0.0625): "
        f"{emp_ok}; explicit-codebook marginals exact: {exact_ok}",
    )


def test_criterion_5_rate_property_suite():
    checked = 0
    ok = True
    for m_u in range(2, 65):
        for l_u in range(1, m_u):
            binom = math.comb(m_u, l_u)
            for s in (0, 1, 2):
                rb = per_antenna_rate(m_u, l_u, s)
                if not (rb.c_lower < rb.c_const <= rb.c_upper):
                    ok = False
                if not (rb.stirling_lo <= rb.r_bar <= rb.stirling_hi):
                    ok = False
                if not (2 ** rb.index_bits <= binom < 2 ** (rb.index_bits + 1)):
                    ok = False
                checked += 1
    record(
        5, ok,
        f"C in (C_d, C_u], Stirling interval contains the rate, and "
        f"2^I <= binom < 2^(I+1) for all {checked} (M_u, L_u, S) cases",
    )


def _scalar_grid_checks(rng, n_draws=1000):
    """Closed-form scalar estimators vs numeric/discrete minimizers."""
    worst_box = worst_l0 = 0.0
    for _ in range(n_draws):
        lam = float(rng.uniform(0.01, 1.0))
        lo = float(rng.uniform(0.0, 1.5))
        up = float(rng.uniform(0.1, 1.5))
        tau = float(rng.uniform(0.1, 3.0))
        y = complex(rng.normal(0, 1), rng.normal(0, 1))
        closed = scalar_rls(BoxLassoSpec(lam, lo, up), y, tau)
        numeric = scalar_rls(
            GenericSpec(lambda v, lam=lam: lam * abs(v), lo, up), y.real, tau
        )
        worst_box = max(worst_box, abs(closed - numeric))

        a = float(rng.uniform(0.0, 1.0))
        con = bpsk()
        got = scalar_rls(L0Spec(a, con), y, tau)
        vals = [
            (abs(y - v) ** 2 / tau + (a if v != 0 else 0.0), i, v)
            for i, v in enumerate(con.augmented)
        ]
        best = min(vals)[2]
        worst_l0 = max(worst_l0, abs(got - best))
    return worst_box, worst_l0


def _prox_grid_check(rng, n_draws=1000):
    worst = 0.0
    for _ in range(n_draws):
        w = float(rng.normal(0, 2))
        kappa = float(rng.uniform(0, 1))
        lo = float(rng.uniform(0, 2))
        up = float(rng.uniform(0, 2))
        got = prox_box_soft_threshold(w, kappa, lo, up)
        grid = np.arange(-lo, up + 1e-4, 1e-4)
        vals = (w - grid) ** 2 + 2.0 * kappa * np.abs(grid)
        want = grid[int(np.argmin(vals))]
        worst = max(worst, abs(got - want))
    return worst


def _l0_enumerator_check(rng, n_instances=100):
    """Chunked vectorized search vs a plain-loop enumerator."""
    mismatches = 0
    for i in range(n_instances):
        con = bpsk() if i % 2 == 0 else ssk()
        m = int(rng.integers(3, 7)) if i % 2 == 0 else int(rng.integers(5, 11))
        h = sample_rayleigh(2 * m, m, seed=int(rng.integers(1 << 30))).matrix
        x = np.zeros(m, dtype=complex)
        x[rng.choice(m, 2, replace=False)] = con.points[0]
        y = add_awgn(h @ x, 0.2, seed=int(rng.integers(1 << 30)))
        a = float(rng.uniform(0.0, 0.5))
        got = solve_l0_exhaustive(h, y, a, con)
        best, best_val = None, math.inf
        for cand in product(con.augmented, repeat=m):
            v = np.array(cand)
            val = float(np.sum(np.abs(y - h @ v) ** 2))
            val += a * int(np.count_nonzero(v))
            if val < best_val:
                best, best_val = v, val
        if not np.array_equal(got, best):
            mismatches += 1
    return mismatches


def _functional_mc_check(n=10_000_000):
    """Closed-form functionals vs big scalar-channel Monte Carlo, 3 SE."""
    failures = []
    rng = np.random.default_rng(123)
    # box-LASSO family: 5 random (lam, box, tau, theta) points
    for i in range(5):
        lam = float(rng.uniform(0.05, 0.8))
        lo = 0.0 if i % 2 == 0 else float(rng.uniform(0.0, 1.0))
        up = float(rng.uniform(0.3, 1.2))
        tau = float(rng.uniform(0.2, 2.0))
        theta = float(rng.uniform(0.1, 0.6))
        spec = BoxLassoSpec(lam, lo, up)
        from smrls.replica.decoupled import DecoupledState

        fn = functionals(spec, DecoupledState(0, 0, tau, theta), DEC_SSK)
        mc_e = mc_c = var_e = var_c = 0.0
        for j, (x, w) in enumerate(DEC_SSK.atoms()):
            e, se_e, c, se_c = mc_box_lasso_atom(
                lam, lo, up, tau, theta, x.real, n, seed=1000 + 10 * i + j
            )
            mc_e += w * e
            mc_c += w * c
            var_e += (w * se_e) ** 2
            var_c += (w * se_c) ** 2
        if abs(fn.e_value - mc_e) > 3 * math.sqrt(var_e):
            failures.append(f"box E point {i}")
        if abs(fn.c_value - mc_c) > 3 * math.sqrt(var_c):
            failures.append(f"box C point {i}")
    # l0 family over BPSK: 5 random (a, tau, theta) points
    dec = DecoupledInput(0.25, bpsk())
    for i in range(5):
        a = float(rng.uniform(0.05, 0.6))
        tau = float(rng.uniform(0.2, 2.0))
        theta = float(rng.uniform(0.1, 0.6))
        spec = L0Spec(a, dec.constellation)
        from smrls.replica.decoupled import DecoupledState

        fn = functionals(spec, DecoupledState(0, 0, tau, theta), dec)
        mc_e = mc_c = var_e = var_c = 0.0
        for j, (x, w) in enumerate(dec.atoms()):
            e, se_e, c, se_c = mc_l0_atom(
                a, dec.constellation.points, tau, theta, x, n,
                seed=2000 + 10 * i + j,
            )
            mc_e += w * e
            mc_c += w * c
            var_e += (w * se_e) ** 2
            var_c += (w * se_c) ** 2
        if abs(fn.e_value - mc_e) > 3 * math.sqrt(var_e):
            failures.append(f"l0 E point {i}")
        if abs(fn.c_value - mc_c) > 3 * math.sqrt(var_c):
            failures.append(f"l0 C point {i}")
    return failures


def _tau_theta_fd_check():
    analytic = SPECTRAL
    numeric = SpectralModel(analytic.r_transform, None)
    worst = 0.0
    for c in np.linspace(0.0, 10.0, 10):
        for q in np.linspace(0.0, 10.0, 10):
            ta, tha = tau_theta(analytic, c, q, SIGMA2)
            # closed form directly
            worst = max(worst, abs(ta - 0.5 * (1 + c)) / max(1.0, ta))
            worst = max(
                worst,
                abs(tha - math.sqrt(0.5 * (SIGMA2 + q))) / max(1.0, tha),
            )
            tn, thn = tau_theta(numeric, c, q, SIGMA2)
            worst = max(worst, abs(ta - tn) / max(1.0, ta))
            worst = max(worst, abs(tha - thn) / max(1.0, tha))
    return worst


def test_criterion_6_oracle_equivalences():
    rng = np.random.default_rng(6)
    worst_box, worst_l0 = _scalar_grid_checks(rng)
    worst_prox = _prox_grid_check(rng)
    mismatches = _l0_enumerator_check(rng)
    mc_failures = _functional_mc_check()
    worst_fd = _tau_theta_fd_check()
    ok = (
        worst_box <= 1e-6
        and worst_l0 <= 1e-9
        and worst_prox <= 1e-4
        and mismatches == 0
        and not mc_failures
        and worst_fd <= 1e-8
    )
    record(
        6, ok,
        f"scalar vs numeric minimizer max {worst_box:.1e} (<=1e-6); "
        f"l0 scalar vs discrete argmin max {worst_l0:.1e}; "
        f"prox vs grid max {worst_prox:.1e} (<=1e-4); "
        f"exhaustive l0 vs plain enumerator mismatches {mismatches}/100; "
        f"functionals vs 1e7-draw MC failures {mc_failures or 'none'} (3 SE); "
        f"tau/theta closed form vs finite differences max {worst_fd:.1e} (<=1e-8)",
    )


def test_criterion_7_fixed_point_contract(tmp_path):
    worst_residual = 0.0
    solves = 0
    for lam in (0.05, 0.17, 0.56):
        for spec in (BoxLassoSpec(lam, 0.0, 1.0), BoxLassoSpec(lam)):
            res = solve_fixed_point(spec, SPECTRAL, SIGMA2, DEC_SSK)
            assert res.converged
            worst_residual = max(worst_residual, res.residual_c, res.residual_q)
            solves += 1
    for snr_db in (5.0, 9.0, 13.0):
        sigma2 = 10.0 ** (-snr_db / 10.0)
        a_reg, _ = map_regularizer_constants(sigma2, 0.125, 0)
        res = solve_fixed_point(L0Spec(a_reg, ssk()), SPECTRAL, sigma2, DEC_SSK)
        assert res.converged
        worst_residual = max(worst_residual, res.residual_c, res.residual_q)
        solves += 1
    residual_ok = worst_residual <= 1e-10

    rows = fig_map_bound(tmp_path / "map.csv")
    table = np.array([[float(v) for v in row[1:]] for row in rows])
    monotone_ok = bool(np.all(np.diff(table, axis=0) <= 1e-12))
    order_ok = bool(
        np.all(table[:, 0] <= table[:, 1] + 1e-12)
        and np.all(table[:, 1] <= table[:, 2] + 1e-12)
    )
    ok = residual_ok and monotone_ok and order_ok
    record(
        7, ok,
        f"max residual {worst_residual:.2e} over {solves} converged solves "
        f"(<=1e-10); MAP-bound curves monotone in SNR: {monotone_ok}; "
        f"SSK<=BPSK<=4-QAM ordering: {order_ok}",
    )
