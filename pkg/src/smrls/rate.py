"""Exact per-antenna transmit rate with Stirling-based bounds.

R_bar = (I + L_u * S) / M_u.  Writing R_bar = eta*S + H2(eta)
+ (C - log2 M_u) / (2 M_u) back-solves a constant C which provably lies in
(C_d, C_u] for 1 <= L_u < M_u, with both endpoints depending only on the
activity ratio eta = L_u / M_u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from smrls.codebook import InvalidDimensionError, index_bits


def binary_entropy(p: float) -> float:
    """H2(p) in bits; zero at the endpoints."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


@dataclass(frozen=True)
class RateBounds:
    r_bar: float
    index_bits: int
    c_const: float
    c_lower: float
    c_upper: float
    stirling_lo: float
    stirling_hi: float


def per_antenna_rate(m_u: int, l_u: int, s: int) -> RateBounds:
    """Exact rate plus the interval bounds; bounds are NaN when l_u == m_u."""
    if s < 0:
        raise InvalidDimensionError("bits per symbol must be non-negative")
    i_bits = index_bits(m_u, l_u)
    eta = l_u / m_u
    r_bar = (i_bits + l_u * s) / m_u
    if l_u == m_u:
        nan = math.nan
        return RateBounds(r_bar, i_bits, nan, nan, nan, nan, nan)
    c_const = 2 * m_u * (r_bar - eta * s - binary_entropy(eta)) + math.log2(m_u)
    log_eta_term = math.log2(eta - eta * eta)
    c_lower = math.log2(math.pi / (2 * math.e ** 4)) - log_eta_term
    c_upper = math.log2(math.e ** 2 / (4 * math.pi ** 2)) - log_eta_term

    def from_const(c):
        return eta * s + binary_entropy(eta) + (c - math.log2(m_u)) / (2 * m_u)

    return RateBounds(
        r_bar=r_bar,
        index_bits=i_bits,
        c_const=c_const,
        c_lower=c_lower,
        c_upper=c_upper,
        stirling_lo=from_const(c_lower),
        stirling_hi=from_const(c_upper),
    )
