"""Closed forms for the complete-graph walk with constant killing.

All sites communicate at rate 1/K and every particle is killed at the
same rate p, which makes the invariant law, the marginals, the transient
covariance and the spectrum explicitly computable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .model import Configuration, Model, validate_model
from .oracle import ENUMERATION_GUARD, enumerate_configurations, generator_matrix, spectrum


@dataclass(frozen=True)
class CompleteGraphParams:
    K: int
    N: int
    p: float

    def __post_init__(self):
        if self.K < 2 or self.N < 2:
            raise ValueError("K and N must be >= 2")
        if self.p <= 0:
            raise ValueError("p must be positive")


def cg_model(K: int, p: float) -> Model:
    Q = np.full((K, K), 1.0 / K)
    np.fill_diagonal(Q, 0.0)
    return validate_model(Model(K=K, Q=Q, p0=np.full(K, float(p))))


def cg_invariant(params: CompleteGraphParams) -> np.ndarray:
    """Invariant law over the enumerated configuration space.

    Weight of eta is prod_i prod_{j<eta(i)} (N-1 + K p j) / (j+1), computed
    in log space to survive large N.
    """
    K, N, p = params.K, params.N, params.p
    space = enumerate_configurations(K, N)
    # site-occupancy log-weights, shared across sites by exchangeability
    site_logw = np.zeros(N + 1)
    for n in range(1, N + 1):
        j = n - 1
        site_logw[n] = site_logw[n - 1] + np.log((N - 1 + K * p * j) / (j + 1))
    logw = np.array([site_logw[cfg.eta].sum() for cfg in space.configs])
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def cg_marginal_law(K: int, N: int, x: int) -> float:
    """P(eta(i) = x) under the invariant law, valid for p = 1/K only."""
    if not 0 <= x <= N:
        raise ValueError("x must lie in 0..N")
    if K < 2:
        raise ValueError("K must be >= 2")
    Z = comb((K + 1) * N - K - 1, K * N - K - 1)
    num = comb(N - 2 + x, N - 2) * comb(K * N - K - x, (K - 1) * N - K)
    return float(Fraction(num, Z))


def cg_stationary_moments(params: CompleteGraphParams) -> dict:
    """Stationary variance/covariance of eta(i) and the chaos bound sqrt(K(p+1)/N)."""
    K, N, p = params.K, params.N, params.p
    denom = K * K * (N - 1 + p)
    variance = N * (K - 1) * (N * p + N - 1) / denom
    covariance = (-N * N * (p + 1) + N) / denom
    return {
        "variance": variance,
        "covariance": covariance,
        "chaos_bound": float(np.sqrt(K * (p + 1) / N)),
    }


def _mean(params: CompleteGraphParams, m0: float, t: float) -> float:
    return params.N / params.K + (m0 - params.N / params.K) * np.exp(-t)


def cg_dynamic_covariance(
    params: CompleteGraphParams, eta0: Configuration, t: float, k: int = 0, l: int = 1
) -> float:
    """cov(eta_t(k), eta_t(l)) from a deterministic start, k != l.

    Solves the closed pair of linear equations satisfied by E[eta_t(k)] and
    E[eta_t(k) eta_t(l)]: the product decays at rate c = 2(N-1+p)/(N-1)
    and is fed by (N-1)/K times the sum of the means.
    """
    if k == l:
        raise ValueError("k and l must differ")
    K, N, p = params.K, params.N, params.p
    c = 2.0 * (N - 1 + p) / (N - 1)
    u0 = float(eta0.eta[k] * eta0.eta[l])
    s = float(eta0.eta[k] + eta0.eta[l]) - 2.0 * N / K
    ect = np.exp(-c * t)
    u = u0 * ect + (N - 1) / K * (
        (2.0 * N / K) * (1.0 - ect) / c + s * (np.exp(-t) - ect) / (c - 1.0)
    )
    return float(u - _mean(params, eta0.eta[k], t) * _mean(params, eta0.eta[l], t))


def cg_printed_dynamic_covariance(
    params: CompleteGraphParams, eta0: Configuration, t: float, k: int = 0, l: int = 1
) -> float:
    """The closed-form covariance as printed in the source theorem.

    Kept verbatim for the discrepancy report: it does not vanish at t = 0
    for a deterministic start, unlike the true covariance.
    """
    K, N, p = params.K, params.N, params.p
    c = 2.0 * (N - 1 + p) / (N - 1)
    e0k, e0l = float(eta0.eta[k]), float(eta0.eta[l])
    return float(
        e0k * e0l * np.exp(-c * t)
        + (-N + 1 + 2 * p * N) / (K * (N - 1 + 2 * p)) * (e0k + e0l) * np.exp(-t)
        - e0k * e0l * np.exp(-2.0 * t)
        + (-N * N * (p + 1) + N) / (K * K * (N - 1 + p))
    )


def cg_printed_formula_report(params: CompleteGraphParams, eta0: Configuration) -> dict:
    """Quantify the t = 0 failure of the printed covariance closed form."""
    printed0 = cg_printed_dynamic_covariance(params, eta0, 0.0)
    ode0 = cg_dynamic_covariance(params, eta0, 0.0)
    return {
        "printed_value_at_t0": printed0,
        "ode_value_at_t0": ode0,
        "discrepancy_at_t0": abs(printed0 - ode0),
        "printed_formula_flagged": abs(printed0) > 1e-12,
    }


def cg_spectrum(params: CompleteGraphParams) -> np.ndarray:
    """Sorted candidate eigenvalues of the negated generator.

    Candidates are all sums of K single-site levels lambda_l with
    lambda_l = l + l(l-1) p / (N-1), levels in 0..N and total level <= N.
    """
    K, N, p = params.K, params.N, params.p
    if comb(N + K - 1, K - 1) > ENUMERATION_GUARD:
        raise ValueError("combinatorial guard exceeded")
    levels = np.array([l + l * (l - 1) * p / (N - 1) for l in range(N + 1)])
    if K == 2:
        # vectorized: pairs (l1, l2) with l1 + l2 <= N
        l1, l2 = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
        pair_sums = levels[l1] + levels[l2]
        return np.unique(pair_sums[l1 + l2 <= N])
    sums: set = set()

    def rec(max_level: int, budget: int, acc: float):
        sums.add(acc)
        for l in range(1, min(max_level, budget) + 1):
            rec(l, budget - l, acc + levels[l])

    rec(N, N, 0.0)
    return np.array(sorted(sums))


def cg_spectrum_inclusion(params: CompleteGraphParams) -> dict:
    """Exact spectrum of -L against the candidate set.

    Returns the worst distance from an exact eigenvalue to the candidate
    set and the smallest positive exact eigenvalue.
    """
    model = cg_model(params.K, params.p)
    L = generator_matrix(model, params.N)
    exact = -spectrum(L, reversible=True)[::-1]  # ascending eigenvalues of -L
    candidates = cg_spectrum(params)
    pos = np.searchsorted(candidates, exact)
    lo = candidates[np.clip(pos - 1, 0, candidates.size - 1)]
    hi = candidates[np.clip(pos, 0, candidates.size - 1)]
    dist = np.minimum(np.abs(exact - lo), np.abs(exact - hi))
    positive = exact[exact > 1e-6]
    return {
        "max_candidate_distance": float(dist.max()),
        "smallest_positive_eigenvalue": float(positive.min()),
    }
