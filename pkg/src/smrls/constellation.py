"""Constellation sets used on the active antennas.

A constellation holds 2**S points; SSK is the degenerate S=0 case with the
single point sqrt(P).  Bit-to-point mapping is by point index, big-endian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Constellation:
    points: tuple[complex, ...]
    bits_per_symbol: int
    power: float

    def __post_init__(self):
        if len(self.points) != 2 ** self.bits_per_symbol:
            raise ValueError(
                f"expected {2 ** self.bits_per_symbol} points, got {len(self.points)}"
            )
        if self.power <= 0:
            raise ValueError("power must be positive")

    @property
    def is_real(self) -> bool:
        return all(abs(p.imag) < 1e-15 for p in self.points)

    @property
    def augmented(self) -> tuple[complex, ...]:
        """S_0 = {0} union S."""
        return (0.0 + 0.0j,) + self.points

    def nearest_index(self, value: complex) -> int:
        """Index of the closest point; ties go to the lowest index."""
        d = [abs(value - p) for p in self.points]
        return int(np.argmin(d))


def ssk(power: float = 1.0) -> Constellation:
    """Space shift keying: one point, all information in the antenna index."""
    return Constellation((complex(math.sqrt(power)),), 0, power)


def bpsk(power: float = 1.0) -> Constellation:
    """BPSK with bit 0 -> -sqrt(P), bit 1 -> +sqrt(P)."""
    a = math.sqrt(power)
    return Constellation((complex(-a), complex(a)), 1, power)


def qam4(power: float = 1.0) -> Constellation:
    """4-QAM, Gray mapped over (Re, Im): first bit sets Re sign, second Im sign,
    bit 0 -> negative."""
    a = math.sqrt(power / 2.0)
    pts = []
    for b0 in (0, 1):
        for b1 in (0, 1):
            re = a if b0 else -a
            im = a if b1 else -a
            pts.append(complex(re, im))
    return Constellation(tuple(pts), 2, power)


_PRESETS = {"ssk": ssk, "bpsk": bpsk, "qam4": qam4, "4qam": qam4}


def preset(name: str, power: float = 1.0) -> Constellation:
    try:
        return _PRESETS[name.lower()](power)
    except KeyError:
        raise ValueError(f"unknown constellation preset {name!r}") from None
