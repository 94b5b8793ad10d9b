"""Closed-form bounds: covariance decay, chaos rate and uniform-in-time error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Model, ergodic_coefficients


@dataclass(frozen=True)
class BoundConstants:
    """Q1 is the sup of off-diagonal row sums of Q, p_sup the sup killing
    rate, B = Q1 + 2 p_sup the Gronwall growth rate of the bias, and rho the
    coupling contraction rate."""

    Q1: float
    p_sup: float
    B: float
    rho: float


def bound_constants(model: Model) -> BoundConstants:
    Q1 = float(model.Q.sum(axis=1).max())
    p_sup = float(model.p0.max())
    return BoundConstants(
        Q1=Q1,
        p_sup=p_sup,
        B=Q1 + 2.0 * p_sup,
        rho=ergodic_coefficients(model).rho,
    )


def _decay_factor(rho: float, t: float) -> float:
    """(1 - e^{-2 rho t}) / rho, extended by continuity to 2t at rho = 0."""
    if rho == 0.0:
        return 2.0 * t
    return float(-np.expm1(-2.0 * rho * t) / rho)


def covariance_bound(model: Model, N: int, t: float) -> dict:
    """Time-t covariance bounds for occupation fractions and Lipschitz pairs.

    pair_bound dominates |cov(eta_t(k)/N, eta_t(l)/N)|; lipschitz_bound
    dominates |cov(g(eta_t), h(eta_t))| for 1-Lipschitz g, h in d1.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if t < 0:
        raise ValueError("t must be nonnegative")
    c = bound_constants(model)
    factor = _decay_factor(c.rho, t)
    return {
        "pair_bound": 2.0 * (c.Q1 + c.p_sup) / (N - 1) * factor,
        "lipschitz_bound": 0.5 * factor * (N * c.Q1 + c.p_sup * N * N / (N - 1)),
    }


def chaos_bound(model: Model, N: int, t: float, C: float, tv0: float) -> float:
    """C e^{Bt} (1/sqrt(N) + tv0): empirical-measure error vs the conditioned law.

    The multiplicative constant C has no closed form and is supplied by the
    caller; only the N- and t-scaling shape is testable.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    if not 0.0 <= tv0 <= 1.0:
        raise ValueError("tv0 must lie in [0, 1]")
    c = bound_constants(model)
    return float(C * np.exp(c.B * t) * (1.0 / np.sqrt(N) + tv0))


def uniform_bound(model: Model, N: int, C: float) -> float:
    """Uniform-in-time bound ((B+rho)/B) * (B C / (rho sqrt(N-1)))^{rho/(B+rho)}."""
    c = bound_constants(model)
    if c.rho <= 0:
        raise ValueError("criterion not applicable: rho <= 0")
    if N < 2:
        raise ValueError("N must be >= 2")
    if C <= 0:
        raise ValueError("C must be positive")
    gamma = c.rho / (c.B + c.rho)
    return float((c.B + c.rho) / c.B * (c.B * C / (c.rho * np.sqrt(N - 1))) ** gamma)


def coalescence_tv_bound(rho: float, t: float, w0: float) -> float:
    """e^{-rho t} w0: TV between the copies' laws given initial Wasserstein w0."""
    if w0 < 0:
        raise ValueError("w0 must be nonnegative")
    return float(np.exp(-rho * t) * w0)
