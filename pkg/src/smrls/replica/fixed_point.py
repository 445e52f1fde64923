"""Damped iteration for the (c, q) fixed-point system.

c * theta(c,q) = tau(c) * C(c,q)
q             = E(c,q)

The iteration reported here is the one reached from the canonical
initialization (c0, q0) = (sigma^2, eta * P); multiple solutions are not
searched for.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from smrls.channel import SpectralModel
from smrls.replica.decoupled import (
    DecoupledInput,
    DecoupledState,
    L0Spec,
    tau_theta,
)
from smrls.replica.functionals import (
    asymptotic_error_rate,
    correct_probability,
    functionals,
)


@dataclass
class FixedPointResult:
    c_star: float
    q_star: float
    residual_c: float
    residual_q: float
    iterations: int
    converged: bool
    c_value: float
    e_value: float
    mse: float
    error_rate: float | None = None
    correct_prob: float | None = None
    g_probs: dict | None = None

    @property
    def residual(self) -> float:
        return max(self.residual_c, self.residual_q)


def solve_fixed_point(
    spec,
    spectral: SpectralModel,
    sigma2: float,
    dec_input: DecoupledInput,
    beta: float = 0.5,
    init: tuple[float, float] | None = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    epsilon: float | None = None,
    compute_error_rate: bool = True,
) -> FixedPointResult:
    """Run the damped iteration until both equation residuals drop below tol."""
    if not (0.0 < beta <= 1.0):
        raise ValueError("damping must lie in (0, 1]")
    c, q = (sigma2, dec_input.second_moment) if init is None else init
    converged = False
    it = 0
    res_c = res_q = float("inf")
    fn = None
    for it in range(1, max_iter + 1):
        tau, theta = tau_theta(spectral, c, q, sigma2)
        state = DecoupledState(c, q, tau, theta)
        fn = functionals(spec, state, dec_input)
        res_c = abs(c * theta - tau * fn.c_value)
        res_q = abs(q - fn.e_value)
        if max(res_c, res_q) < tol:
            converged = True
            break
        c = (1.0 - beta) * c + beta * tau * fn.c_value / theta
        q = (1.0 - beta) * q + beta * fn.e_value
        c = max(c, 0.0)
        q = max(q, 0.0)
    tau, theta = tau_theta(spectral, c, q, sigma2)
    state = DecoupledState(c, q, tau, theta)
    fn = functionals(spec, state, dec_input)
    result = FixedPointResult(
        c_star=c,
        q_star=q,
        residual_c=abs(c * theta - tau * fn.c_value),
        residual_q=abs(q - fn.e_value),
        iterations=it,
        converged=converged,
        c_value=fn.c_value,
        e_value=fn.e_value,
        mse=fn.e_value,
        g_probs=fn.g_probs,
    )
    if fn.g_probs is not None:
        result.correct_prob = correct_probability(fn.g_probs, dec_input)
    if compute_error_rate:
        try:
            result.error_rate = asymptotic_error_rate(
                spec, state, dec_input, epsilon=epsilon
            )
        except NotImplementedError:
            result.error_rate = None
    return result
