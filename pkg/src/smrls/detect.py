"""Finite-dimensional RLS detectors.

Convex box-LASSO / classic LASSO by proximal gradient over a real feasible
set (the channel stays complex; gradients go through Re(H^H .)), exhaustive
l0/MAP detection at small scale, decision rules and distortion metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from smrls.codebook import SmCodebook, encode
from smrls.constellation import Constellation

FEASIBILITY_SLACK = 1e-12


class SearchSpaceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    """Real feasible interval [-lower, upper]; lower, upper >= 0."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ValueError("box must contain zero: lower, upper >= 0")


FULL_REAL = Box(math.inf, math.inf)


@dataclass(frozen=True)
class HardThreshold:
    """x -> sqrt(P) 1{x >= eps}; for SSK-like single-point real sets."""

    epsilon: float


@dataclass(frozen=True)
class SignWithSparsity:
    """Zero the M-L smallest-magnitude entries, map the rest via sqrt(P) sign."""

    keep: int


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class RlsSpec:
    """One detector: feasible set, regularizer, decision rule.

    ``regularizer`` is ("l1", lam) or ("l0", a); for l0 the MAP constant b is
    carried by the caller for documentation only and never enters the search.
    """

    feasible: Box
    regularizer: tuple[str, float]
    decision: HardThreshold | SignWithSparsity | Identity = Identity()

    def __post_init__(self):
        kind, value = self.regularizer
        if kind not in ("l1", "l0"):
            raise ValueError(f"unknown regularizer {kind!r}")
        if kind == "l1" and value < 0:
            raise ValueError("l1 weight must be non-negative")


@dataclass
class SoftEstimate:
    values: np.ndarray
    iterations: int
    objective: float
    kkt_residual: float
    converged: bool


def prox_box_soft_threshold(w, kappa, lower: float, upper: float):
    """clip(soft_threshold(w, kappa), -lower, upper); vectorized in w."""
    if np.any(np.asarray(kappa) < 0):
        raise ValueError("threshold must be non-negative")
    soft = np.sign(w) * np.maximum(np.abs(w) - kappa, 0.0)
    return np.clip(soft, -lower, upper)


def _kkt_residual(v, grad, lam, box: Box):
    """Projected-subgradient norm; 0 iff v satisfies the box-LASSO KKT system."""
    r = np.empty_like(v)
    pos = v > FEASIBILITY_SLACK
    neg = v < -FEASIBILITY_SLACK
    zero = ~(pos | neg)
    r[pos] = grad[pos] + lam
    r[neg] = grad[neg] - lam
    r[zero] = np.maximum(np.abs(grad[zero]) - lam, 0.0)
    at_hi = v >= box.upper - FEASIBILITY_SLACK
    at_lo = v <= -box.lower + FEASIBILITY_SLACK
    r[at_hi] = np.maximum(r[at_hi], 0.0)  # only outward push is infeasible
    r[at_lo] = np.minimum(r[at_lo], 0.0)
    return float(np.linalg.norm(r))


def _power_iteration(a, n_iter=200, tol=1e-12, seed=0):
    """Largest eigenvalue of a symmetric PSD matrix."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iter):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ (a @ v))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def solve_box_lasso(
    h: np.ndarray,
    y: np.ndarray,
    lam: float,
    box: Box = FULL_REAL,
    tol: float = 1e-8,
    max_iter: int = 50_000,
    x0: np.ndarray | None = None,
) -> SoftEstimate:
    """Minimize ||y - H v||^2 + lam ||v||_1 over real v in [-l, u]^M.

    Proximal gradient with a power-iteration step size; the objective is
    non-increasing across iterations.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    m = h.shape[1]
    a = np.real(h.conj().T @ h)  # gradient operator for real v
    b = np.real(h.conj().T @ y)
    y_norm2 = float(np.real(y.conj() @ y))
    lip = 2.0 * _power_iteration(a)
    if lip == 0.0:  # zero channel: pure l1 + box, minimized at 0
        v = np.zeros(m)
        return SoftEstimate(v, 0, y_norm2, 0.0, True)
    step = 1.0 / (lip * (1.0 + 1e-9))
    v = np.zeros(m) if x0 is None else np.clip(np.asarray(x0, float), -box.lower, box.upper)

    def objective(vv):
        return float(vv @ (a @ vv) - 2.0 * b @ vv + y_norm2 + lam * np.abs(vv).sum())

    obj = objective(v)
    grad = 2.0 * (a @ v - b)
    kkt_target = 10.0 * tol * (1.0 + y_norm2)
    kkt = _kkt_residual(v, grad, lam, box)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        v = prox_box_soft_threshold(v - step * grad, step * lam, box.lower, box.upper)
        av = a @ v
        new_obj = float(v @ av - 2.0 * b @ v + y_norm2 + lam * np.abs(v).sum())
        grad = 2.0 * (av - b)
        kkt = _kkt_residual(v, grad, lam, box)
        small_step = abs(obj - new_obj) <= tol * max(1.0, abs(obj))
        obj = new_obj
        if small_step and kkt <= kkt_target:
            converged = True
            break
    return SoftEstimate(v, it, obj, kkt, converged)


def _candidate_argmin(h, y, candidates, penalties):
    """Least-squares argmin over a candidate matrix, chunked; first-index ties."""
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    best_idx, best_val = 0, np.inf
    chunk = 4096
    for start in range(0, candidates.shape[0], chunk):
        block = candidates[start: start + chunk]
        resid = y[None, :] - block @ h.T
        vals = np.sum(np.abs(resid) ** 2, axis=1) + penalties[start: start + chunk]
        i = int(np.argmin(vals))
        if vals[i] < best_val - 1e-15:
            best_idx, best_val = start + i, float(vals[i])
    return best_idx


def solve_l0_exhaustive(
    h: np.ndarray,
    y: np.ndarray,
    a: float,
    constellation: Constellation,
    mode: str = "iid-mismatched",
    codebooks: list[SmCodebook] | None = None,
    max_space: int = 1 << 24,
) -> np.ndarray:
    """Global minimizer of the l0-regularized least squares over S_0^M
    (``iid-mismatched``) or of the residual over valid codeword concatenations
    (``codebook-exact``, true MAP under uniform payloads).
    """
    h = np.asarray(h, dtype=complex)
    m = h.shape[1]
    if mode == "iid-mismatched":
        alphabet = np.array(constellation.augmented)
        n_cand = len(alphabet) ** m
        if n_cand > max_space:
            raise SearchSpaceTooLargeError(
                f"{n_cand} candidates exceed the limit {max_space}"
            )
        grids = np.array(list(product(alphabet, repeat=m)))
        penalties = a * np.count_nonzero(grids, axis=1).astype(float)
        best = _candidate_argmin(h, y, grids, penalties)
        return grids[best]
    if mode == "codebook-exact":
        if not codebooks:
            raise ValueError("codebook-exact mode needs per-user codebooks")
        per_user = []
        for cb in codebooks:
            n_words = 1 << cb.payload_bits(constellation.bits_per_symbol)
            words = np.empty((n_words, cb.m_u), dtype=complex)
            for w in range(n_words):
                bits = [
                    (w >> (cb.payload_bits(constellation.bits_per_symbol) - 1 - i)) & 1
                    for i in range(cb.payload_bits(constellation.bits_per_symbol))
                ]
                words[w] = encode(cb, constellation, bits)
            per_user.append(words)
        n_cand = math.prod(len(w) for w in per_user)
        if n_cand > max_space:
            raise SearchSpaceTooLargeError(
                f"{n_cand} codeword combinations exceed the limit {max_space}"
            )
        combos = np.array(
            [np.concatenate(parts) for parts in product(*per_user)]
        )
        penalties = np.zeros(len(combos))
        best = _candidate_argmin(h, y, combos, penalties)
        return combos[best]
    raise ValueError(f"unknown mode {mode!r}")


def apply_decision(soft: np.ndarray, spec: RlsSpec, power: float = 1.0) -> np.ndarray:
    """Map a soft estimate into S_0^M using the spec's decision rule."""
    values = np.asarray(soft)
    rule = spec.decision
    root_p = math.sqrt(power)
    if isinstance(rule, Identity):
        return values.astype(complex)
    if isinstance(rule, HardThreshold):
        return np.where(np.real(values) >= rule.epsilon, root_p, 0.0).astype(complex)
    if isinstance(rule, SignWithSparsity):
        out = root_p * np.sign(np.real(values)).astype(complex)
        order = np.lexsort((np.arange(len(values)), np.abs(values)))
        out[order[: len(values) - rule.keep]] = 0.0
        return out
    raise TypeError(f"unknown decision rule {rule!r}")


def distortion(estimate: np.ndarray, truth: np.ndarray, metric: str) -> float:
    """Average per-entry distortion: ``error-rate`` or ``mse``."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth must have equal lengths")
    if metric == "error-rate":
        return float(np.mean(~np.isclose(estimate, truth, atol=1e-9)))
    if metric == "mse":
        return float(np.mean(np.abs(estimate - truth) ** 2))
    raise ValueError(f"unknown metric {metric!r}")


def map_regularizer_constants(sigma2: float, eta: float, s: int) -> tuple[float, float]:
    """(a, b) of the postulated i.i.d. sparse prior; b never enters the search."""
    if not (0.0 < eta < 1.0):
        raise ValueError("need 0 < eta < 1")
    a = sigma2 * (s * math.log(2.0) + math.log(1.0 - eta) - math.log(eta))
    b = -sigma2 * math.log(1.0 - eta)
    return a, b
