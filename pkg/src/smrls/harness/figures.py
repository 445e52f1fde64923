"""Figure-reproduction commands: each writes one CSV with documented columns.

Plot rendering is out of scope; the CSVs are the deliverable.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from smrls.channel import rayleigh_r_transform
from smrls.constellation import bpsk, preset, qam4, ssk
from smrls.detect import map_regularizer_constants
from smrls.harness.config import build_system, example3_config, example4_config
from smrls.replica.decoupled import BoxLassoSpec, DecoupledInput, L0Spec
from smrls.replica.fixed_point import solve_fixed_point
from smrls.replica.tuning import tune
from smrls.stats import empirical_stats

DEFAULT_SNR_GRID = tuple(np.linspace(5.0, 13.0, 9))
DEFAULT_LAM_GRID = tuple(np.round(np.linspace(0.01, 0.61, 13), 4))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else -math.inf


def fig_prior(path, n_draws: int = 100_000, entry: int = 80, seed: int = 42):
    """Empirical vs i.i.d. reference marginal of one transmit entry
    (statistics benchmark: K=10, M_u=16, L_u=2, BPSK, random codebook).
    Columns: value, empirical, reference."""
    config = example3_config()
    codebook, constellation = build_system(config)
    stats = empirical_stats(
        codebook, constellation, config.k_users, entry, n_draws, seed=seed
    )
    rows = [
        (f"{v.real:g}", f"{stats.marginal[v]:.6f}",
         f"{stats.reference_marginal.get(v, 0.0):.6f}")
        for v in sorted(stats.marginal, key=lambda z: z.real)
    ]
    write_csv(path, ["value", "empirical", "reference"], rows)
    return stats


def _example4_point():
    config = example4_config()
    spectral = rayleigh_r_transform(config.xi)
    dec_input = DecoupledInput(config.eta, preset(config.constellation, config.power))
    return config, spectral, dec_input


def fig_mse(path, lam_grid=DEFAULT_LAM_GRID):
    """Asymptotic soft-estimate MSE vs lambda for box [0,1] and classic LASSO
    at the SSK benchmark point.  Columns: lambda, box_mse_db, classic_mse_db."""
    config, spectral, dec_input = _example4_point()
    rows = []
    for lam in lam_grid:
        box = solve_fixed_point(
            BoxLassoSpec(lam, 0.0, 1.0), spectral, config.sigma2, dec_input,
            compute_error_rate=False,
        )
        classic = solve_fixed_point(
            BoxLassoSpec(lam), spectral, config.sigma2, dec_input,
            compute_error_rate=False,
        )
        rows.append((lam, f"{_db(box.mse):.6f}", f"{_db(classic.mse):.6f}"))
    write_csv(path, ["lambda", "box_mse_db", "classic_mse_db"], rows)
    return rows


def fig_error_sweep(path, lam_grid=DEFAULT_LAM_GRID, epsilon=None):
    """Asymptotic error rate vs lambda for both LASSO detectors.
    Columns: lambda, box_error, classic_error."""
    config, spectral, dec_input = _example4_point()
    rows = []
    for lam in lam_grid:
        box = solve_fixed_point(
            BoxLassoSpec(lam, 0.0, 1.0), spectral, config.sigma2, dec_input,
            epsilon=epsilon,
        )
        classic = solve_fixed_point(
            BoxLassoSpec(lam), spectral, config.sigma2, dec_input, epsilon=epsilon,
        )
        rows.append((lam, f"{box.error_rate:.8e}", f"{classic.error_rate:.8e}"))
    write_csv(path, ["lambda", "box_error", "classic_error"], rows)
    return rows


def _tuned_errors(snr_db, spectral, dec_input, eta, s_bits, power, lam_grid, epsilon):
    sigma2 = power * 10.0 ** (-snr_db / 10.0)
    box = tune(
        lambda l: BoxLassoSpec(l, 0.0, math.sqrt(power)), spectral, sigma2,
        dec_input, "error-rate", lam_grid, epsilon=epsilon,
    )
    classic = tune(
        lambda l: BoxLassoSpec(l), spectral, sigma2, dec_input, "error-rate",
        lam_grid, epsilon=epsilon,
    )
    a_reg, _ = map_regularizer_constants(sigma2, eta, s_bits)
    map_res = solve_fixed_point(
        L0Spec(a_reg, dec_input.constellation), spectral, sigma2, dec_input
    )
    return box, classic, map_res


def fig_tuned_error(path, snr_db_grid=DEFAULT_SNR_GRID,
                    lam_grid=DEFAULT_LAM_GRID, epsilon=None):
    """Tuned error rate vs SNR for box/classic LASSO plus the mismatched-MAP
    bound at the SSK benchmark dimensions.
    Columns: snr_db, box_error, classic_error, map_error."""
    config, spectral, dec_input = _example4_point()
    rows = []
    for snr_db in snr_db_grid:
        box, classic, map_res = _tuned_errors(
            snr_db, spectral, dec_input, config.eta, 0, config.power,
            lam_grid, epsilon,
        )
        rows.append((
            f"{snr_db:g}", f"{box.metric_star:.8e}",
            f"{classic.metric_star:.8e}", f"{map_res.error_rate:.8e}",
        ))
    write_csv(path, ["snr_db", "box_error", "classic_error", "map_error"], rows)
    return rows


def fig_lambda_dict(path, snr_db_grid=DEFAULT_SNR_GRID,
                    lam_grid=DEFAULT_LAM_GRID, epsilon=None):
    """Tuned regularizer vs SNR (the run-time tuning dictionary).
    Columns: snr_db, box_lambda, classic_lambda."""
    config, spectral, dec_input = _example4_point()
    rows = []
    for snr_db in snr_db_grid:
        box, classic, _ = _tuned_errors(
            snr_db, spectral, dec_input, config.eta, 0, config.power,
            lam_grid, epsilon,
        )
        rows.append((f"{snr_db:g}", f"{box.lam_star:.6f}", f"{classic.lam_star:.6f}"))
    write_csv(path, ["snr_db", "box_lambda", "classic_lambda"], rows)
    return rows


def fig_map_bound(path, snr_db_grid=DEFAULT_SNR_GRID, power: float = 1.0):
    """Mismatched-MAP error bound vs SNR for SSK/BPSK/4-QAM at M_u=8, L_u=1,
    system load 1/4 (effective load 2); replica-only, no finite-size MAP.
    Columns: snr_db, ssk_error, bpsk_error, qam4_error."""
    m_u, l_u, alpha = 8, 1, 0.25
    eta = l_u / m_u
    xi = alpha * m_u
    spectral = rayleigh_r_transform(xi)
    rows = []
    results = {}
    for snr_db in snr_db_grid:
        sigma2 = power * 10.0 ** (-snr_db / 10.0)
        errs = []
        for con in (ssk(power), bpsk(power), qam4(power)):
            a_reg, _ = map_regularizer_constants(sigma2, eta, con.bits_per_symbol)
            res = solve_fixed_point(
                L0Spec(a_reg, con), spectral, sigma2,
                DecoupledInput(eta, con),
            )
            errs.append(res.error_rate)
            results[(snr_db, con.bits_per_symbol)] = res
        rows.append((f"{snr_db:g}",) + tuple(f"{e:.8e}" for e in errs))
    write_csv(path, ["snr_db", "ssk_error", "bpsk_error", "qam4_error"], rows)
    return rows
