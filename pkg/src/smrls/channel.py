"""Channel sampling, AWGN, and the spectral (R-transform) layer.

The asymptotic analysis only consumes the R-transform of the squared singular
value distribution of the channel; the i.i.d. Rayleigh preset ships with its
closed form, other right-unitarily-invariant ensembles enter through a
user-supplied callable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray
    n_rx: int
    m_tx: int

    @property
    def effective_load(self) -> float:
        return self.m_tx / self.n_rx


@dataclass(frozen=True)
class SpectralModel:
    """R-transform R(omega) of the asymptotic squared-singular-value law.

    ``r_prime`` is the analytic derivative dR/domega when available; the
    replica layer falls back to central finite differences otherwise.
    """

    r_transform: Callable[[float], float]
    r_prime: Callable[[float], float] | None = None
    description: str = "custom"


def rayleigh_r_transform(xi: float) -> SpectralModel:
    """i.i.d. Rayleigh entries of variance 1/M: R(omega) = (1/xi) / (1 - omega)."""
    if xi <= 0:
        raise ValueError("effective load xi must be positive")

    def r(omega: float) -> float:
        if omega >= 1.0:
            raise ValueError(f"R-transform pole: omega = {omega} >= 1")
        return (1.0 / xi) / (1.0 - omega)

    def r_prime(omega: float) -> float:
        if omega >= 1.0:
            raise ValueError(f"R-transform pole: omega = {omega} >= 1")
        return (1.0 / xi) / (1.0 - omega) ** 2

    return SpectralModel(r, r_prime, description=f"rayleigh(xi={xi})")


def sample_rayleigh(n_rx: int, m_tx: int, seed=None) -> ChannelRealization:
    """N x M matrix of i.i.d. CN(0, 1/M) entries (per-entry total variance 1/M)."""
    if n_rx < 1 or m_tx < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(1.0 / (2.0 * m_tx))
    h = scale * (
        rng.standard_normal((n_rx, m_tx)) + 1j * rng.standard_normal((n_rx, m_tx))
    )
    return ChannelRealization(h, n_rx, m_tx)


def add_awgn(signal: np.ndarray, sigma2: float, seed=None) -> np.ndarray:
    """signal + CN(0, sigma2) noise, per-entry total variance sigma2."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    signal = np.asarray(signal, dtype=complex)
    if sigma2 == 0.0:
        return signal.copy()
    rng = np.random.default_rng(seed)
    scale = np.sqrt(sigma2 / 2.0)
    noise = scale * (
        rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    )
    return signal + noise


@dataclass(frozen=True)
class ExperimentConfig:
    """System dimensions, loads and noise for one experiment."""

    k_users: int
    m_u: int
    l_u: int
    n_rx: int
    sigma2: float
    power: float = 1.0
    constellation: str = "ssk"
    master_seed: int = 0
    trials: int = 1000
    codebook_policy: str = "lexicographic"
    codebook_seed: int | None = None

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if not (1 <= self.l_u <= self.m_u):
            raise ValueError("need 1 <= l_u <= m_u")
        if self.k_users < 1 or self.n_rx < 1:
            raise ValueError("k_users and n_rx must be positive")

    @property
    def eta(self) -> float:
        return self.l_u / self.m_u

    @property
    def m_total(self) -> int:
        return self.k_users * self.m_u

    @property
    def l_total(self) -> int:
        return self.k_users * self.l_u

    @property
    def xi(self) -> float:
        return self.m_total / self.n_rx

    @property
    def alpha(self) -> float:
        return self.k_users / self.n_rx

    @property
    def xi_u(self) -> float:
        return self.m_u / self.n_rx

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.power / self.sigma2)


def dump_realization_csv(channel: ChannelRealization, path) -> None:
    """Debug dump, row-major, cells formatted as ``re,im`` pairs."""
    with open(path, "w") as fh:
        for row in channel.matrix:
            fh.write(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")
