"""Empirical statistics of the multiuser transmit signal.

Used to check how closely the (non-i.i.d.) spatially modulated signal tracks
the i.i.d. reference law p(v) = (1-eta) 1{v=0} + 2^-S eta 1{v != 0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from smrls.codebook import SmCodebook
from smrls.constellation import Constellation


@dataclass
class EmpiricalStats:
    entry: int  # 1-based index into the stacked transmit vector
    marginal: dict[complex, float]
    reference_marginal: dict[complex, float]
    moments: dict[tuple[int, int, int], complex] = field(default_factory=dict)
    reference_moments: dict[tuple[int, int, int], complex] = field(default_factory=dict)


def reference_marginal(codebook: SmCodebook, constellation: Constellation):
    """i.i.d. reference law on S_0."""
    eta = codebook.l_u / codebook.m_u
    w = eta / len(constellation.points)
    out = {0j: 1.0 - eta}
    for p in constellation.points:
        out[p] = out.get(p, 0.0) + w
    return out


def codebook_marginal(codebook: SmCodebook, constellation: Constellation, m: int):
    """Exact marginal of per-user entry m (1-based) under uniform payloads.

    The activity probability is the fraction of codebook supports containing
    antenna m; conditioned on active, the symbol is uniform on S.
    """
    if not (1 <= m <= codebook.m_u):
        raise IndexError(f"antenna index {m} out of range")
    n_active = sum(1 for sup in codebook.supports if m in sup)
    p_active = n_active / len(codebook.supports)
    out = {0j: 1.0 - p_active}
    w = p_active / len(constellation.points)
    for p in constellation.points:
        out[p] = out.get(p, 0.0) + w
    return out


def _reference_power_moment(codebook, constellation, k: int) -> complex:
    """E[x^k] under the i.i.d. reference law, k >= 1."""
    eta = codebook.l_u / codebook.m_u
    return eta * np.mean([p ** k for p in constellation.points])


def draw_transmit_matrix(
    codebook: SmCodebook,
    constellation: Constellation,
    k_users: int,
    n_draws: int,
    rng,
) -> np.ndarray:
    """(n_draws, K*M_u) matrix of independent transmit vector realizations.

    Uniform payload bits are equivalent to uniform support and symbol indices,
    which vectorizes cleanly.
    """
    m_u = codebook.m_u
    sups = np.array(codebook.supports)  # (2^I, L_u), 1-based
    pts = np.array(constellation.points)
    x = np.zeros((n_draws, k_users * m_u), dtype=complex)
    rows = np.arange(n_draws)[:, None]
    for k in range(k_users):
        idx = rng.integers(len(codebook.supports), size=n_draws)
        antennas = sups[idx]  # (n_draws, L_u)
        syms = rng.integers(len(pts), size=(n_draws, codebook.l_u))
        x[rows, k * m_u + antennas - 1] = pts[syms]
    return x


def empirical_stats(
    codebook: SmCodebook,
    constellation: Constellation,
    k_users: int,
    m: int,
    n_draws: int,
    seed=None,
    moments: list[tuple[int, int, int]] | None = None,
) -> EmpiricalStats:
    """Empirical marginal of entry m (1-based) and joint moments
    rho^{lt}_m(delta) = mean of x_m^l x_{m+delta}^t over n_draws realizations.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    m_total = k_users * codebook.m_u
    if not (1 <= m <= m_total):
        raise IndexError(f"entry {m} out of range [1, {m_total}]")
    rng = np.random.default_rng(seed)
    x = draw_transmit_matrix(codebook, constellation, k_users, n_draws, rng)
    col = x[:, m - 1]

    values = list(dict.fromkeys([0j] + list(constellation.points)))
    hist = {v: float(np.mean(np.isclose(col, v))) for v in values}

    result = EmpiricalStats(
        entry=m,
        marginal=hist,
        reference_marginal=reference_marginal(codebook, constellation),
    )
    for (ell, t, delta) in moments or []:
        j = m + delta
        if not (1 <= j <= m_total):
            raise IndexError(f"entry {j} (delta={delta}) out of range")
        result.moments[(ell, t, delta)] = complex(
            np.mean(col ** ell * x[:, j - 1] ** t)
        )
        if delta == 0:
            ref = _reference_power_moment(codebook, constellation, ell + t)
        else:
            ref = _reference_power_moment(
                codebook, constellation, ell
            ) * _reference_power_moment(codebook, constellation, t)
        result.reference_moments[(ell, t, delta)] = complex(ref)
    return result
