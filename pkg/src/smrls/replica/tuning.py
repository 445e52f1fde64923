"""Regularizer tuning against the asymptotic metric.

Grid search over lambda followed by golden-section refinement inside the
bracketing grid cell; the whole procedure is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from smrls.channel import SpectralModel
from smrls.replica.decoupled import DecoupledInput
from smrls.replica.fixed_point import FixedPointResult, solve_fixed_point


class TuningError(RuntimeError):
    pass


@dataclass
class TuneResult:
    lam_star: float
    metric_star: float
    result: FixedPointResult
    grid: list[tuple[float, float]]  # evaluated (lambda, metric) pairs


def _metric_of(result: FixedPointResult, metric: str) -> float:
    if metric == "mse":
        return result.mse
    if metric == "error-rate":
        if result.error_rate is None:
            raise TuningError("estimator has no error-rate functional")
        return result.error_rate
    raise ValueError(f"unknown metric {metric!r}")


def tune(
    make_spec,
    spectral: SpectralModel,
    sigma2: float,
    dec_input: DecoupledInput,
    metric: str,
    lam_grid,
    refine: bool = True,
    epsilon: float | None = None,
    **fp_kwargs,
) -> TuneResult:
    """Minimize the asymptotic metric over lambda.

    ``make_spec`` maps a lambda value to an estimator spec.
    """
    lam_grid = list(lam_grid)
    if not lam_grid:
        raise ValueError("lambda grid must be non-empty")
    evaluated: list[tuple[float, float]] = []
    results: dict[float, FixedPointResult] = {}

    def evaluate(lam: float) -> float:
        res = solve_fixed_point(
            make_spec(lam), spectral, sigma2, dec_input, epsilon=epsilon, **fp_kwargs
        )
        if not res.converged:
            return math.inf
        results[lam] = res
        value = _metric_of(res, metric)
        evaluated.append((lam, value))
        return value

    grid_vals = [evaluate(lam) for lam in lam_grid]
    if all(math.isinf(v) for v in grid_vals):
        raise TuningError("no grid point converged")
    i = int(np.argmin(grid_vals))
    lam_star, val_star = lam_grid[i], grid_vals[i]
    if refine and len(lam_grid) > 1:
        lo = lam_grid[max(i - 1, 0)]
        hi = lam_grid[min(i + 1, len(lam_grid) - 1)]
        if hi > lo:
            res = minimize_scalar(
                evaluate, bracket=None, bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-5},
            )
            if res.fun <= val_star:
                lam_star, val_star = float(res.x), float(res.fun)
    if lam_star not in results:  # re-solve at the winner if needed
        evaluate(lam_star)
    return TuneResult(lam_star, val_star, results[lam_star], evaluated)


def tuning_dictionary(
    make_spec,
    spectral: SpectralModel,
    dec_input: DecoupledInput,
    snr_db_grid,
    metric: str,
    lam_grid,
    power: float = 1.0,
    epsilon: float | None = None,
    **fp_kwargs,
):
    """One tuned operating point per SNR: rows of (snr_db, lambda*, metric*).

    Rows whose grid fails to converge are kept with NaN entries.
    """
    rows = []
    for snr_db in snr_db_grid:
        sigma2 = power * 10.0 ** (-snr_db / 10.0)
        try:
            tuned = tune(
                make_spec, spectral, sigma2, dec_input, metric, lam_grid,
                epsilon=epsilon, **fp_kwargs,
            )
            rows.append((float(snr_db), tuned.lam_star, tuned.metric_star, True))
        except TuningError:
            rows.append((float(snr_db), math.nan, math.nan, False))
    return rows
