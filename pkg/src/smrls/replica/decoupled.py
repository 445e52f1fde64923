"""The decoupled scalar setting.

The vector system asymptotically behaves like a scalar AWGN channel
y = x + theta*z with x = psi*s (psi Bernoulli(eta), s uniform on S) and
z circular complex Gaussian of unit variance, estimated by a scalar RLS map
with noise scale tau.  tau and theta are driven by the channel R-transform
through tuning parameters (c, q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from smrls.channel import SpectralModel
from smrls.constellation import Constellation

FD_STEP = 1e-6


class NegativeRadicandError(ArithmeticError):
    def __init__(self, c, q, radicand):
        super().__init__(
            f"negative radicand {radicand:.3e} for theta at c={c:.6g}, q={q:.6g}"
        )
        self.c, self.q, self.radicand = c, q, radicand


@dataclass(frozen=True)
class DecoupledInput:
    """Law of the scalar input x = psi * s."""

    eta: float
    constellation: Constellation

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("activity ratio must lie in (0, 1]")

    def atoms(self) -> list[tuple[complex, float]]:
        """(value, weight) pairs: 0 with mass 1-eta, each point with 2^-S eta."""
        w = self.eta / len(self.constellation.points)
        return [(0j, 1.0 - self.eta)] + [
            (p, w) for p in self.constellation.points
        ]

    @property
    def second_moment(self) -> float:
        return self.eta * self.constellation.power


@dataclass(frozen=True)
class DecoupledState:
    c: float
    q: float
    tau: float
    theta: float


@dataclass(frozen=True)
class BoxLassoSpec:
    """l1-regularized scalar estimator over the box [-lower, upper]."""

    lam: float
    lower: float = math.inf
    upper: float = math.inf

    def __post_init__(self):
        if self.lam < 0 or self.lower < 0 or self.upper < 0:
            raise ValueError("lam, lower, upper must be non-negative")


@dataclass(frozen=True)
class L0Spec:
    """Mismatched-MAP scalar estimator: 0 vs the best constellation point."""

    a: float
    constellation: Constellation


@dataclass(frozen=True)
class GenericSpec:
    """Numeric fallback: arbitrary regularizer over a real interval."""

    f_reg: Callable[[float], float]
    lower: float = math.inf
    upper: float = math.inf


def tau_theta(
    spectral: SpectralModel, c: float, q: float, sigma2: float
) -> tuple[float, float]:
    """tau = 1/R(-c); theta = tau * sqrt(d/dc[(sigma2*c - q) R(-c)]).

    Uses the analytic derivative of R when the spectral model carries one,
    otherwise central finite differences.
    """
    r_mc = spectral.r_transform(-c)
    if r_mc <= 0:
        raise ValueError(f"R(-c) = {r_mc} must be positive (c={c})")
    tau = 1.0 / r_mc
    if spectral.r_prime is not None:
        # d/dc[(s2 c - q) R(-c)] = s2 R(-c) - (s2 c - q) R'(-c)
        radicand = sigma2 * r_mc - (sigma2 * c - q) * spectral.r_prime(-c)
    else:
        h = FD_STEP * max(1.0, abs(c))

        def g(cc):
            return (sigma2 * cc - q) * spectral.r_transform(-cc)

        radicand = (g(c + h) - g(c - h)) / (2.0 * h)
    if radicand < 0:
        raise NegativeRadicandError(c, q, radicand)
    return tau, tau * math.sqrt(radicand)


def _scalar_box_lasso(spec: BoxLassoSpec, y: complex, tau: float) -> float:
    kappa = tau * spec.lam / 2.0
    w = y.real if isinstance(y, complex) else float(y)
    soft = math.copysign(max(abs(w) - kappa, 0.0), w)
    return min(max(soft, -spec.lower), spec.upper)


def _scalar_l0(spec: L0Spec, y: complex, tau: float) -> complex:
    best_u, best_s = -math.inf, 0j
    for s in spec.constellation.points:
        u = 2.0 * (np.conj(y) * s).real - abs(s) ** 2
        if u > best_u + 1e-15:
            best_u, best_s = u, s
    if best_u <= tau * spec.a:
        return 0j
    return best_s


def _scalar_generic(spec: GenericSpec, y: complex, tau: float) -> float:
    from scipy.optimize import minimize_scalar

    w = complex(y)
    lo = -spec.lower if math.isfinite(spec.lower) else -abs(w) - 10.0
    hi = spec.upper if math.isfinite(spec.upper) else abs(w) + 10.0

    def obj(v):
        return (abs(w - v) ** 2) / tau + spec.f_reg(v)

    grid = np.linspace(lo, hi, 2001)
    vals = np.array([obj(v) for v in grid])
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(obj, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12})
    best_v, best_f = float(res.x), float(res.fun)
    if obj(0.0) <= best_f:  # regularizers may be discontinuous at zero
        return 0.0
    return best_v


def scalar_rls(spec, y: complex, tau: float):
    """Scalar RLS recovery argmin_v (1/tau)|y - v|^2 + f_reg(v) over X_0."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if isinstance(spec, BoxLassoSpec):
        return _scalar_box_lasso(spec, complex(y), tau)
    if isinstance(spec, L0Spec):
        return _scalar_l0(spec, complex(y), tau)
    if isinstance(spec, GenericSpec):
        return _scalar_generic(spec, complex(y), tau)
    raise TypeError(f"unknown estimator spec {spec!r}")
