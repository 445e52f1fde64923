"""MA-SM codebook construction, bit-to-signal encoding and hard decoding.

A codebook is an ordered set of 2**I antenna subsets (supports) of size L_u out
of M_u, where I = floor(log2 binom(M_u, L_u)).  The first I payload bits select
the support (big-endian); the remaining L_u * S bits map onto constellation
points placed on the support in ascending antenna order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterable, Sequence

import numpy as np

from smrls.constellation import Constellation

# Enumerating all binom(M_u, L_u) supports is required for codebook
# construction; beyond this bound only rate computations are supported.
_MAX_ENUMERATION = 1 << 22


class InvalidDimensionError(ValueError):
    pass


def index_bits(m_u: int, l_u: int) -> int:
    """Number of index-modulation bits I = floor(log2 binom(m_u, l_u)).

    Computed with exact integer arithmetic; no floating logs of factorials.
    """
    if l_u < 1 or m_u < 1 or l_u > m_u:
        raise InvalidDimensionError(f"need 1 <= l_u <= m_u, got m_u={m_u}, l_u={l_u}")
    return math.comb(m_u, l_u).bit_length() - 1


@dataclass(frozen=True)
class SmCodebook:
    m_u: int
    l_u: int
    index_bits: int
    supports: tuple[tuple[int, ...], ...]  # 1-based antenna indices, ascending

    def __post_init__(self):
        expected = index_bits(self.m_u, self.l_u)
        if self.index_bits != expected:
            raise ValueError(f"index_bits must be {expected}")
        if len(self.supports) != 1 << self.index_bits:
            raise ValueError(
                f"need {1 << self.index_bits} supports, got {len(self.supports)}"
            )
        seen = set()
        for sup in self.supports:
            if len(sup) != self.l_u:
                raise ValueError(f"support {sup} has wrong size")
            if any(a < 1 or a > self.m_u for a in sup):
                raise ValueError(f"support {sup} out of antenna range")
            if len(set(sup)) != self.l_u:
                raise ValueError(f"support {sup} has repeated antennas")
            key = tuple(sorted(sup))
            if key in seen:
                raise ValueError(f"duplicate support {sup}")
            seen.add(key)

    def payload_bits(self, bits_per_symbol: int) -> int:
        """R_u bits per user per channel use."""
        return self.index_bits + self.l_u * bits_per_symbol


def build_codebook(
    m_u: int,
    l_u: int,
    policy: str = "lexicographic",
    seed: int | None = None,
    supports: Sequence[Sequence[int]] | None = None,
) -> SmCodebook:
    """Build a codebook under one of three policies.

    ``lexicographic``: first 2**I subsets in lexicographic order (default,
    reproducible).  ``random``: seeded draw of 2**I distinct subsets.
    ``explicit``: caller-provided list of 2**I distinct supports.
    """
    i_bits = index_bits(m_u, l_u)
    n_supports = 1 << i_bits
    if policy == "explicit":
        if supports is None:
            raise ValueError("explicit policy requires a support list")
        sups = tuple(tuple(sorted(int(a) for a in s)) for s in supports)
    elif policy == "lexicographic":
        sups = tuple(islice(combinations(range(1, m_u + 1), l_u), n_supports))
    elif policy == "random":
        total = math.comb(m_u, l_u)
        if total > _MAX_ENUMERATION:
            raise InvalidDimensionError(
                f"binom({m_u},{l_u}) = {total} supports is too large to enumerate"
            )
        all_sups = list(combinations(range(1, m_u + 1), l_u))
        rng = np.random.default_rng(seed)
        chosen = rng.choice(total, size=n_supports, replace=False)
        sups = tuple(all_sups[i] for i in chosen)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return SmCodebook(m_u, l_u, i_bits, sups)


def _bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("payload bits must be 0/1")
        value = (value << 1) | b
    return value


def _int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def encode(
    codebook: SmCodebook, constellation: Constellation, payload: Sequence[int]
) -> np.ndarray:
    """Map one user payload to its sparse length-M_u transmit vector."""
    s = constellation.bits_per_symbol
    expected = codebook.payload_bits(s)
    if len(payload) != expected:
        raise ValueError(f"payload must have {expected} bits, got {len(payload)}")
    sup_idx = _bits_to_int(payload[: codebook.index_bits])
    support = codebook.supports[sup_idx]
    x = np.zeros(codebook.m_u, dtype=complex)
    for pos, antenna in enumerate(sorted(support)):
        if s == 0:
            point = constellation.points[0]
        else:
            sym_bits = payload[codebook.index_bits + pos * s: codebook.index_bits + (pos + 1) * s]
            point = constellation.points[_bits_to_int(sym_bits)]
        x[antenna - 1] = point
    return x


def project_support(codebook: SmCodebook, values: np.ndarray) -> int:
    """Index of the codebook support with the largest total |values| mass.

    Ties break toward the lowest modulation index.
    """
    best_idx, best_mass = 0, -1.0
    for idx, sup in enumerate(codebook.supports):
        mass = float(sum(abs(values[a - 1]) for a in sup))
        if mass > best_mass + 1e-15:
            best_idx, best_mass = idx, mass
    return best_idx


def decode_hard(
    codebook: SmCodebook, constellation: Constellation, detected: np.ndarray
) -> list[int]:
    """Invert :func:`encode` on a detected vector in S_0^{M_u}.

    If the nonzero support is not in the codebook, project onto the codeword
    support with maximum total magnitude (lowest index on ties), then demap
    each active entry to the nearest constellation point.
    """
    detected = np.asarray(detected, dtype=complex)
    if detected.shape != (codebook.m_u,):
        raise ValueError(f"detected vector must have length {codebook.m_u}")
    observed = tuple(sorted(int(i) + 1 for i in np.nonzero(detected)[0]))
    support_map = {tuple(sorted(s)): i for i, s in enumerate(codebook.supports)}
    if observed in support_map:
        sup_idx = support_map[observed]
    else:
        sup_idx = project_support(codebook, detected)
    bits = _int_to_bits(sup_idx, codebook.index_bits)
    s = constellation.bits_per_symbol
    if s > 0:
        for antenna in sorted(codebook.supports[sup_idx]):
            point_idx = constellation.nearest_index(detected[antenna - 1])
            bits.extend(_int_to_bits(point_idx, s))
    return bits


def save_codebook(codebook: SmCodebook, path) -> None:
    """Line-oriented text format: header ``M_u L_u I``, then one support per
    line (1-based antenna indices), line order = modulation index."""
    with open(path, "w") as fh:
        fh.write(f"{codebook.m_u} {codebook.l_u} {codebook.index_bits}\n")
        for sup in codebook.supports:
            fh.write(" ".join(str(a) for a in sup) + "\n")


def load_codebook(path) -> SmCodebook:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError("malformed codebook header")
        m_u, l_u, i_bits = (int(v) for v in header)
        sups = []
        for line in fh:
            line = line.strip()
            if line:
                sups.append(tuple(int(a) for a in line.split()))
    cb = SmCodebook(m_u, l_u, index_bits(m_u, l_u), tuple(sups))
    if cb.index_bits != i_bits:
        raise ValueError("header index bits inconsistent with dimensions")
    return cb
