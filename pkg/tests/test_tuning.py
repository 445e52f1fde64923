import math

import numpy as np
import pytest

from smrls.channel import rayleigh_r_transform
from smrls.constellation import ssk
from smrls.replica.decoupled import BoxLassoSpec, DecoupledInput
from smrls.replica.tuning import TuningError, tune, tuning_dictionary

SIGMA2 = 10.0 ** -1.1
SPECTRAL = rayleigh_r_transform(0.5)
DEC = DecoupledInput(0.125, ssk())
GRID = list(np.round(np.linspace(0.05, 0.6, 12), 4))


def box_spec(lam):
    return BoxLassoSpec(lam, 0.0, 1.0)


def classic_spec(lam):
    return BoxLassoSpec(lam)


def test_tune_minimizer_contract():
    tuned = tune(box_spec, SPECTRAL, SIGMA2, DEC, "error-rate", GRID)
    for lam, value in tuned.grid:
        assert tuned.metric_star <= value + 1e-15
    assert tuned.result.converged


def test_tune_mse_metric():
    tuned = tune(classic_spec, SPECTRAL, SIGMA2, DEC, "mse", GRID)
    assert tuned.metric_star == pytest.approx(tuned.result.mse)
    assert 0.3 < tuned.lam_star < 0.9 or tuned.lam_star == GRID[-1]


def test_single_point_grid_reduces_to_solve():
    tuned = tune(box_spec, SPECTRAL, SIGMA2, DEC, "error-rate", [0.17],
                 refine=False)
    assert tuned.lam_star == 0.17
    assert len(tuned.grid) == 1


def test_tune_rejects_empty_grid_and_bad_metric():
    with pytest.raises(ValueError):
        tune(box_spec, SPECTRAL, SIGMA2, DEC, "error-rate", [])
    with pytest.raises(ValueError):
        tune(box_spec, SPECTRAL, SIGMA2, DEC, "ber", [0.1])


def test_tuning_dictionary_endpoints_monotone():
    rows = tuning_dictionary(
        box_spec, SPECTRAL, DEC, [5.0, 13.0], "error-rate", GRID
    )
    assert len(rows) == 2
    (snr_lo, lam_lo, err_lo, ok_lo), (snr_hi, lam_hi, err_hi, ok_hi) = rows
    assert ok_lo and ok_hi
    assert err_hi < err_lo  # tuned error improves with SNR
    assert not math.isnan(lam_lo) and not math.isnan(lam_hi)


def test_tuning_error_when_nothing_converges():
    def diverging_spec(lam):
        return BoxLassoSpec(lam)

    with pytest.raises(TuningError):
        tune(diverging_spec, SPECTRAL, SIGMA2, DEC, "error-rate", [0.1],
             max_iter=0)
