import numpy as np
import pytest

from smrls.codebook import build_codebook
from smrls.constellation import bpsk, ssk
from smrls.stats import (
    codebook_marginal,
    draw_transmit_matrix,
    empirical_stats,
    reference_marginal,
)

# single user, 5 antennas, 2 active, BPSK: the asymmetric toy codebook
TOY_SUPPORTS = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4)]


def toy_codebook():
    return build_codebook(5, 2, policy="explicit", supports=TOY_SUPPORTS)


def test_reference_marginal_sums_to_one():
    cb = build_codebook(8, 1)
    ref = reference_marginal(cb, ssk())
    assert ref[0j] == 1 - 1 / 8
    assert ref[1.0 + 0j] == 1 / 8
    assert abs(sum(ref.values()) - 1.0) < 1e-15


def test_toy_codebook_marginals_closed_form():
    cb = toy_codebook()
    con = bpsk()
    m1 = codebook_marginal(cb, con, 1)  # antenna 1 active in 4/8 supports
    assert m1[0j] == 0.5
    assert m1[1.0 + 0j] == 0.25 and m1[-1.0 + 0j] == 0.25
    m5 = codebook_marginal(cb, con, 5)  # antenna 5 active in 2/8 supports
    assert m5[0j] == 0.75
    assert m5[1.0 + 0j] == 0.125 and m5[-1.0 + 0j] == 0.125


def test_codebook_marginal_bounds():
    with pytest.raises(IndexError):
        codebook_marginal(toy_codebook(), bpsk(), 6)


def test_draw_transmit_matrix_shapes_and_sparsity():
    cb = build_codebook(8, 1)
    rng = np.random.default_rng(0)
    x = draw_transmit_matrix(cb, ssk(), 3, 100, rng)
    assert x.shape == (100, 24)
    assert np.all(np.count_nonzero(x, axis=1) == 3)


def test_empirical_stats_deterministic():
    cb = build_codebook(8, 1)
    s1 = empirical_stats(cb, ssk(), 2, 5, 2000, seed=11)
    s2 = empirical_stats(cb, ssk(), 2, 5, 2000, seed=11)
    assert s1.marginal == s2.marginal


def test_empirical_matches_codebook_marginal():
    cb = toy_codebook()
    con = bpsk()
    stats = empirical_stats(cb, con, 1, 5, 200_000, seed=0)
    exact = codebook_marginal(cb, con, 5)
    for v, p in exact.items():
        assert abs(stats.marginal[v] - p) < 5e-3


def test_joint_moments_against_reference():
    cb = build_codebook(8, 1)
    stats = empirical_stats(
        cb, ssk(), 2, 3, 100_000, seed=1, moments=[(1, 1, 0), (1, 1, 1)]
    )
    # same-entry second moment = activity probability 1/8
    assert abs(stats.moments[(1, 1, 0)].real - 0.125) < 5e-3
    assert stats.reference_moments[(1, 1, 0)].real == pytest.approx(0.125)
    # cross moment within one user is 0 (L_u = 1: antennas exclude each other)
    assert abs(stats.moments[(1, 1, 1)].real) < 5e-3
    assert stats.reference_moments[(1, 1, 1)].real == pytest.approx(0.125 ** 2)


def test_empirical_stats_bad_entry():
    cb = build_codebook(8, 1)
    with pytest.raises(IndexError):
        empirical_stats(cb, ssk(), 2, 17, 10)
