"""Command-line front end.

Exit codes: 0 success, 2 convergence failure, 1 invalid input.  Every run
prints a JSON summary (with the run manifest embedded where trials are
involved); tabular results go to CSV files with a header row.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict

from smrls.channel import rayleigh_r_transform
from smrls.codebook import InvalidDimensionError, build_codebook, encode
from smrls.constellation import preset
from smrls.detect import map_regularizer_constants
from smrls.harness import figures
from smrls.harness.config import (
    DetectorConfig,
    build_system,
    detector_spec,
    example4_config,
    parse_config,
)
from smrls.harness.montecarlo import (
    ConvergenceFailure,
    compare_replica_mc,
    make_manifest,
    run_monte_carlo,
)
from smrls.rate import per_antenna_rate
from smrls.replica.decoupled import BoxLassoSpec, DecoupledInput, L0Spec
from smrls.replica.fixed_point import solve_fixed_point
from smrls.replica.functionals import QuadratureError
from smrls.replica.tuning import TuningError, tune, tuning_dictionary
from smrls.stats import empirical_stats

REPLICA_HEADER = [
    "snr_db", "lambda", "c_star", "q_star", "residual",
    "mse", "error_rate", "converged",
]


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_grid(text):
    """Either "lo:hi:count" or a comma-separated list."""
    if ":" in text:
        lo, hi, count = text.split(":")
        count = int(count)
        if count < 1:
            raise ValueError("grid count must be >= 1")
        lo, hi = float(lo), float(hi)
        if count == 1:
            return [lo]
        step = (hi - lo) / (count - 1)
        return [lo + i * step for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _load_config(args):
    if getattr(args, "config", None):
        config, det = parse_config(args.config)
    else:
        config, det = example4_config(), DetectorConfig(kind="classic-lasso")
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "snr_db", None) is not None:
        overrides["sigma2"] = config.power * 10.0 ** (-args.snr_db / 10.0)
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    if getattr(args, "detector", None) is not None or getattr(args, "lam", None) is not None:
        det = DetectorConfig(
            kind=args.detector or det.kind,
            lam=det.lam if args.lam is None else args.lam,
            lower=det.lower,
            upper=det.upper,
            epsilon=det.epsilon,
        )
    return config, det


def _replica_setup(config):
    constellation = preset(config.constellation, config.power)
    return (
        rayleigh_r_transform(config.xi),
        DecoupledInput(config.eta, constellation),
        constellation,
    )


def _asymptotic_spec(config, det, constellation):
    if det.kind == "classic-lasso":
        return BoxLassoSpec(det.lam)
    if det.kind == "box-lasso":
        lower = 0.0 if math.isinf(det.lower) else det.lower
        upper = math.sqrt(config.power) if math.isinf(det.upper) else det.upper
        return BoxLassoSpec(det.lam, lower, upper)
    if det.kind == "map-exact":
        s = constellation.bits_per_symbol
        a, _ = map_regularizer_constants(config.sigma2, config.eta, s)
        return L0Spec(a, constellation)
    raise ValueError(f"unknown detector type {det.kind!r}")


def _replica_row(config, lam, result):
    return [
        f"{config.snr_db:.6f}", f"{lam:.6f}", f"{result.c_star:.12e}",
        f"{result.q_star:.12e}", f"{result.residual:.3e}",
        f"{result.mse:.12e}",
        "" if result.error_rate is None else f"{result.error_rate:.12e}",
        str(result.converged),
    ]


def cmd_rate(args):
    bounds = per_antenna_rate(args.m_u, args.l_u, args.s)
    _emit(asdict(bounds))
    return 0


def cmd_encode(args):
    codebook = build_codebook(args.m_u, args.l_u)
    constellation = preset(args.constellation, args.power)
    bits = [int(b) for b in args.bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be a 0/1 string")
    vector = encode(codebook, constellation, bits)
    _emit({
        "bits": args.bits,
        "vector_re": [v.real for v in vector],
        "vector_im": [v.imag for v in vector],
        "support": [i for i, v in enumerate(vector) if v != 0],
    })
    return 0


def cmd_stats(args):
    config, _ = _load_config(args)
    codebook, constellation = build_system(config)
    stats = empirical_stats(
        codebook, constellation, config.k_users, args.entry, args.draws,
        seed=config.master_seed,
    )
    _emit({
        "entry": args.entry,
        "draws": args.draws,
        "marginal": {f"{v.real:g}{v.imag:+g}j": p for v, p in stats.marginal.items()},
        "reference_marginal": {
            f"{v.real:g}{v.imag:+g}j": p for v, p in stats.reference_marginal.items()
        },
        "moments": {str(k): v for k, v in stats.moments.items()},
        "reference_moments": {str(k): v for k, v in stats.reference_moments.items()},
    })
    return 0


def cmd_simulate(args):
    config, det = _load_config(args)
    spec = detector_spec(det, config.power)
    result = run_monte_carlo(
        config, spec, args.metric, n_jobs=args.jobs, keep_values=False
    )
    manifest = make_manifest(config)
    _emit({
        "detector": asdict(det),
        "metric": result.metric,
        "mean": result.mean,
        "mean_db": 10.0 * math.log10(result.mean) if result.mean > 0 else None,
        "stderr": result.stderr,
        "trials": result.trials,
        "solver_failures": result.solver_failures,
        "manifest": json.loads(manifest.to_json()),
    })
    return 0


def cmd_replica(args):
    config, det = _load_config(args)
    spectral, dec_input, constellation = _replica_setup(config)
    spec = _asymptotic_spec(config, det, constellation)
    result = solve_fixed_point(
        spec, spectral, config.sigma2, dec_input, epsilon=args.epsilon
    )
    if args.csv:
        _write_csv(args.csv, REPLICA_HEADER, [_replica_row(config, det.lam, result)])
    _emit({
        "detector": asdict(det),
        "snr_db": config.snr_db,
        "c_star": result.c_star,
        "q_star": result.q_star,
        "residual": result.residual,
        "iterations": result.iterations,
        "mse": result.mse,
        "mse_db": 10.0 * math.log10(result.mse) if result.mse > 0 else None,
        "error_rate": result.error_rate,
        "converged": result.converged,
    })
    return 0 if result.converged else 2


def cmd_tune(args):
    config, det = _load_config(args)
    spectral, dec_input, constellation = _replica_setup(config)
    lam_grid = _parse_grid(args.lam_grid)

    def make_spec(lam):
        return _asymptotic_spec(
            config,
            DetectorConfig(det.kind, lam, det.lower, det.upper),
            constellation,
        )

    tuned = tune(
        make_spec, spectral, config.sigma2, dec_input, args.metric, lam_grid,
        epsilon=args.epsilon,
    )
    if args.csv:
        _write_csv(
            args.csv, REPLICA_HEADER,
            [_replica_row(config, tuned.lam_star, tuned.result)],
        )
    _emit({
        "detector_kind": det.kind,
        "metric": args.metric,
        "lam_star": tuned.lam_star,
        "metric_star": tuned.metric_star,
        "evaluations": len(tuned.grid),
        "converged": tuned.result.converged,
    })
    return 0


def cmd_dict(args):
    config, det = _load_config(args)
    spectral, dec_input, constellation = _replica_setup(config)
    lam_grid = _parse_grid(args.lam_grid)
    snr_grid = _parse_grid(args.snr_grid)

    def make_spec(lam):
        return _asymptotic_spec(
            config,
            DetectorConfig(det.kind, lam, det.lower, det.upper),
            constellation,
        )

    rows = tuning_dictionary(
        make_spec, spectral, dec_input, snr_grid, args.metric, lam_grid,
        power=config.power, epsilon=args.epsilon,
    )
    _write_csv(
        args.csv,
        ["snr_db", "lambda", "metric", "converged"],
        [(f"{s:g}", f"{l:.6f}", f"{m:.8e}", str(ok)) for s, l, m, ok in rows],
    )
    failures = sum(1 for r in rows if not r[3])
    _emit({
        "detector_kind": det.kind,
        "metric": args.metric,
        "rows": len(rows),
        "failures": failures,
        "csv": args.csv,
    })
    return 2 if failures else 0


def cmd_compare(args):
    config, det = _load_config(args)
    from smrls.detect import Box, FULL_REAL

    if det.kind == "box-lasso":
        lower = 0.0 if math.isinf(det.lower) else det.lower
        upper = math.sqrt(config.power) if math.isinf(det.upper) else det.upper
        box = Box(lower, upper)
    else:
        box = FULL_REAL
    lam_grid = _parse_grid(args.lam_grid)
    rows, max_dev_db = compare_replica_mc(
        config, lam_grid, box=box, metric=args.metric, epsilon=args.epsilon,
    )
    if args.csv:
        _write_csv(
            args.csv,
            ["lambda", "replica", "mc_mean", "mc_stderr"],
            [(f"{l:.6f}", f"{r:.10e}", f"{m:.10e}", f"{s:.3e}") for l, r, m, s in rows],
        )
    manifest = make_manifest(config, outputs=[args.csv] if args.csv else [])
    _emit({
        "detector_kind": det.kind,
        "metric": args.metric,
        "rows": [
            {"lambda": l, "replica": r, "mc_mean": m, "mc_stderr": s}
            for l, r, m, s in rows
        ],
        "max_deviation_db": None if math.isnan(max_dev_db) else max_dev_db,
        "manifest": json.loads(manifest.to_json()),
    })
    return 0


def _fig_command(name, func):
    def run(args):
        kwargs = {}
        if name == "fig-prior":
            kwargs = dict(n_draws=args.draws, entry=args.entry, seed=args.seed or 42)
        func(args.out, **kwargs)
        _emit({"figure": name, "csv": args.out})
        return 0

    return run


FIGURES = {
    "fig-prior": (figures.fig_prior, "transmit-entry marginal vs i.i.d. reference"),
    "fig-mse": (figures.fig_mse, "asymptotic MSE vs lambda, box and classic LASSO"),
    "fig-error-sweep": (figures.fig_error_sweep, "asymptotic error rate vs lambda"),
    "fig-tuned-error": (figures.fig_tuned_error, "tuned error rate vs SNR + MAP bound"),
    "fig-lambda-dict": (figures.fig_lambda_dict, "tuned lambda vs SNR"),
    "fig-map-bound": (figures.fig_map_bound, "MAP error bound vs SNR per constellation"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smrls",
        description="Spatial-modulation RLS detection and asymptotic analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file; defaults to the SSK benchmark")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--snr-db", type=float, default=None)
    common.add_argument(
        "--detector", choices=["classic-lasso", "box-lasso", "map-exact"], default=None
    )
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--epsilon", type=float, default=None,
                        help="decision threshold for error-rate metrics")

    p = sub.add_parser("rate", help="per-antenna transmit rate and bounds")
    p.add_argument("--m-u", type=int, required=True)
    p.add_argument("--l-u", type=int, required=True)
    p.add_argument("--s", type=int, default=0, help="bits per constellation symbol")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("encode", help="map a bit string to a transmit vector")
    p.add_argument("--m-u", type=int, required=True)
    p.add_argument("--l-u", type=int, required=True)
    p.add_argument("--constellation", default="ssk")
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--bits", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("stats", parents=[common],
                       help="empirical transmit statistics of one entry")
    p.add_argument("--entry", type=int, default=1, help="1-based entry index")
    p.add_argument("--draws", type=int, default=100_000)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run")
    p.add_argument("--metric", choices=["mse", "error-rate"], default="mse")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replica", parents=[common],
                       help="solve the asymptotic fixed point")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_replica)

    p = sub.add_parser("tune", parents=[common], help="tune the regularizer")
    p.add_argument("--metric", choices=["mse", "error-rate"], default="error-rate")
    p.add_argument("--lam-grid", default="0.01:0.61:13")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("dict", parents=[common],
                       help="tuning dictionary over an SNR grid")
    p.add_argument("--metric", choices=["mse", "error-rate"], default="error-rate")
    p.add_argument("--lam-grid", default="0.01:0.61:13")
    p.add_argument("--snr-grid", default="5:13:9")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("compare", parents=[common],
                       help="replica prediction vs Monte Carlo over a lambda grid")
    p.add_argument("--metric", choices=["mse", "error-rate"], default="mse")
    p.add_argument("--lam-grid", required=True)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_compare)

    for name, (func, help_text) in FIGURES.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", required=True, help="output CSV path")
        if name == "fig-prior":
            p.add_argument("--draws", type=int, default=100_000)
            p.add_argument("--entry", type=int, default=80)
            p.add_argument("--seed", type=int, default=42)
        p.set_defaults(func=_fig_command(name, func))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors; we reserve 2
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except (ConvergenceFailure, TuningError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, InvalidDimensionError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
