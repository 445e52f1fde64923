"""Monte Carlo experiment orchestration.

Per-trial RNG streams are derived from (master seed, trial index), so parallel
and serial execution of the same manifest aggregate identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

import smrls
from smrls.channel import ExperimentConfig, add_awgn, sample_rayleigh
from smrls.detect import (
    RlsSpec,
    apply_decision,
    distortion,
    solve_box_lasso,
    solve_l0_exhaustive,
)
from smrls.harness.config import build_system
from smrls.replica.decoupled import BoxLassoSpec, DecoupledInput
from smrls.replica.fixed_point import solve_fixed_point
from smrls.channel import rayleigh_r_transform
from smrls.stats import draw_transmit_matrix


class ConvergenceFailure(RuntimeError):
    pass


@dataclass
class AggregateResult:
    metric: str
    mean: float
    stderr: float
    trials: int
    values: list[float] | None = None
    solver_failures: int = 0


@dataclass
class RunManifest:
    config: dict
    master_seed: int
    trials: int
    trial_seeds: list[list[int]] = field(default_factory=list)
    version: str = smrls.__version__
    outputs: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)


def make_manifest(config: ExperimentConfig, outputs=()) -> RunManifest:
    return RunManifest(
        config=asdict(config),
        master_seed=config.master_seed,
        trials=config.trials,
        trial_seeds=[[config.master_seed, t] for t in range(config.trials)],
        outputs=list(outputs),
    )


def trial_rng(master_seed: int, trial: int):
    """Deterministic per-trial stream, independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, trial)))


def _aggregate(metric, values, failures=0, keep_values=True):
    arr = np.asarray(values, dtype=float)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return AggregateResult(
        metric=metric,
        mean=float(arr.mean()),
        stderr=stderr,
        trials=len(arr),
        values=list(arr) if keep_values else None,
        solver_failures=failures,
    )


def _run_trial(config, codebook, constellation, detector, metric, trial):
    rng = trial_rng(config.master_seed, trial)
    x = draw_transmit_matrix(codebook, constellation, config.k_users, 1, rng)[0]
    h = sample_rayleigh(config.n_rx, config.m_total, rng).matrix
    y = add_awgn(h @ x, config.sigma2, rng)
    kind, weight = detector.regularizer
    if kind == "l1":
        est = solve_box_lasso(h, y, weight, detector.feasible)
        if not est.converged:
            return None
        soft = est.values
    else:  # exhaustive MAP over valid codewords
        soft = solve_l0_exhaustive(
            h, y, weight, constellation, mode="codebook-exact",
            codebooks=[codebook] * config.k_users,
        )
    if metric == "mse":
        return distortion(soft, x, "mse")
    decided = apply_decision(soft, detector, config.power)
    return distortion(decided, x, "error-rate")


def run_monte_carlo(
    config: ExperimentConfig,
    detector: RlsSpec,
    metric: str,
    trials: int | None = None,
    n_jobs: int = 1,
    keep_values: bool = True,
) -> AggregateResult:
    """Average the chosen distortion metric over independent channel/payload
    realizations; non-converged solver runs are counted and excluded."""
    trials = config.trials if trials is None else trials
    if trials < 1:
        raise ValueError("need at least one trial")
    codebook, constellation = build_system(config)
    args = (config, codebook, constellation, detector, metric)
    if n_jobs != 1:
        from joblib import Parallel, delayed

        raw = Parallel(n_jobs=n_jobs)(
            delayed(_run_trial)(*args, t) for t in range(trials)
        )
    else:
        raw = [_run_trial(*args, t) for t in range(trials)]
    values = [v for v in raw if v is not None]
    failures = len(raw) - len(values)
    if not values:
        raise ConvergenceFailure("every trial failed to converge")
    return _aggregate(metric, values, failures, keep_values)


def compare_replica_mc(
    config: ExperimentConfig,
    lam_grid,
    box=None,
    metric: str = "mse",
    trials: int | None = None,
    epsilon: float | None = None,
):
    """Replica prediction vs Monte Carlo means over a lambda grid.

    Channel and payload draws are shared across the grid within each trial;
    the solver warm-starts along the grid.  Returns (rows, max_dev_db) with
    rows of (lambda, replica, mc_mean, mc_stderr); max_dev_db is the largest
    absolute deviation in dB for MSE metrics, NaN otherwise.
    """
    lam_grid = list(lam_grid)
    if not lam_grid:
        raise ValueError("lambda grid must be non-empty")
    trials = config.trials if trials is None else trials
    codebook, constellation = build_system(config)
    from smrls.detect import FULL_REAL, HardThreshold, RlsSpec as _Spec

    box = FULL_REAL if box is None else box
    eps = math.sqrt(config.power) / 2.0 if epsilon is None else epsilon
    spectral = rayleigh_r_transform(config.xi)
    dec_input = DecoupledInput(config.eta, constellation)

    replica_vals = []
    for lam in lam_grid:
        lower = box.lower if math.isfinite(box.lower) else math.inf
        upper = box.upper if math.isfinite(box.upper) else math.inf
        res = solve_fixed_point(
            BoxLassoSpec(lam, lower, upper), spectral, config.sigma2, dec_input,
            epsilon=eps, compute_error_rate=(metric == "error-rate"),
        )
        if not res.converged:
            raise ConvergenceFailure(f"replica solve failed at lambda={lam}")
        replica_vals.append(res.mse if metric == "mse" else res.error_rate)

    mc_values = [[] for _ in lam_grid]
    for trial in range(trials):
        rng = trial_rng(config.master_seed, trial)
        x = draw_transmit_matrix(codebook, constellation, config.k_users, 1, rng)[0]
        h = sample_rayleigh(config.n_rx, config.m_total, rng).matrix
        y = add_awgn(h @ x, config.sigma2, rng)
        warm = None
        for i, lam in enumerate(lam_grid):
            est = solve_box_lasso(h, y, lam, box, x0=warm)
            warm = est.values
            if not est.converged:
                continue
            if metric == "mse":
                mc_values[i].append(distortion(est.values, x, "mse"))
            else:
                spec = _Spec(box, ("l1", lam), HardThreshold(eps))
                decided = apply_decision(est.values, spec, config.power)
                mc_values[i].append(distortion(decided, x, "error-rate"))

    rows = []
    max_dev_db = 0.0 if metric == "mse" else math.nan
    for lam, rep, vals in zip(lam_grid, replica_vals, mc_values):
        agg = _aggregate(metric, vals, keep_values=False)
        rows.append((lam, rep, agg.mean, agg.stderr))
        if metric == "mse":
            dev = abs(10.0 * math.log10(rep) - 10.0 * math.log10(agg.mean))
            max_dev_db = max(max_dev_db, dev)
    return rows, max_dev_db
