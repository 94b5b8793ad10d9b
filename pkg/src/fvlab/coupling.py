"""Two-copy coupling of the particle system and Wasserstein decay estimation.

The coupled generator moves matched particles together whenever the rates
allow it and pairs the unmatched particles across the two copies so that
coalescence is favored; its d1 drift is bounded by -rho * d1.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Configuration, Model, d1_distance, ergodic_coefficients
from .simulate import _grid, transition_rates


@dataclass(frozen=True)
class CoupledPair:
    eta: Configuration
    eta_prime: Configuration

    def __post_init__(self):
        if self.eta.eta.shape != self.eta_prime.eta.shape:
            raise ValueError("copies live on different state spaces")
        if self.eta.N != self.eta_prime.N:
            raise ValueError("copies have different particle counts")

    @property
    def d1(self) -> float:
        return d1_distance(self.eta, self.eta_prime)


@dataclass(frozen=True)
class DecayCurve:
    """Monte Carlo estimate of E[d1(eta_t, eta'_t)] on a time grid."""

    times: np.ndarray
    estimate: np.ndarray
    std_error: np.ndarray

    def rows(self):
        return list(zip(self.times, self.estimate, self.std_error))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,estimate,std_error\n")
        for t, v, s in self.rows():
            buf.write(f"{float(t)!r},{float(v)!r},{float(s)!r}\n")
        return buf.getvalue()


def _emit(model: Model, N: int, pair: CoupledPair):
    K = model.K
    cap = int(_kernels.coupled_clause_capacity(K))
    ia = np.empty(cap, dtype=np.int64)
    ja = np.empty(cap, dtype=np.int64)
    ib = np.empty(cap, dtype=np.int64)
    jb = np.empty(cap, dtype=np.int64)
    rates = np.empty(cap, dtype=np.float64)
    n = _kernels._emit_coupled(
        model.Q, model.p0, N, pair.eta.eta, pair.eta_prime.eta, ia, ja, ib, jb, rates
    )
    return ia[:n], ja[:n], ib[:n], jb[:n], rates[:n]


def coupled_rates(model: Model, N: int, pair: CoupledPair):
    """Complete list of coupled moves ((i, i', j, j'), rate).

    The move sends one first-copy particle i -> j and one second-copy
    particle i' -> j'; i == j (resp. i' == j') encodes a copy that stays
    put.  Rates of clauses with identical indices are aggregated.
    """
    ia, ja, ib, jb, rates = _emit(model, N, pair)
    agg: dict[tuple, float] = {}
    for k in range(rates.size):
        key = (int(ia[k]), int(ib[k]), int(ja[k]), int(jb[k]))
        agg[key] = agg.get(key, 0.0) + float(rates[k])
    return sorted(agg.items())


def simulate_pair(
    model: Model, N: int, pair0: CoupledPair, t_end: float, seed: int
) -> CoupledPair:
    """One exact coupled trajectory endpoint, deterministic given the seed."""
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    K = model.K
    times = np.array([t_end], dtype=float)
    out_a = np.empty((1, K), dtype=np.int64)
    out_b = np.empty((1, K), dtype=np.int64)
    cap = int(_kernels.coupled_clause_capacity(K))
    bufs = [np.empty(cap, dtype=np.int64) for _ in range(4)]
    rates = np.empty(cap, dtype=np.float64)
    eta = pair0.eta.eta.copy()
    etap = pair0.eta_prime.eta.copy()
    _kernels.seed_backend(_kernels.replica_seed(seed, 0))
    _kernels._sim_pair(model.Q, model.p0, N, eta, etap, times, out_a, out_b, *bufs, rates)
    return CoupledPair(
        eta=Configuration(eta=out_a[0], N=N),
        eta_prime=Configuration(eta=out_b[0], N=N),
    )


def wasserstein_decay(
    model: Model, N: int, pair0: CoupledPair, times, replicas: int, seed: int
) -> DecayCurve:
    """Monte Carlo curve of E[d1] under the coupling, with standard errors."""
    times = _grid(times)
    out_d1 = np.empty((replicas, times.size), dtype=np.float64)
    _kernels._ensemble_pair_d1(
        model.Q,
        model.p0,
        N,
        pair0.eta.eta,
        pair0.eta_prime.eta,
        times,
        _kernels.replica_seed(seed, 0),
        replicas,
        out_d1,
    )
    est = out_d1.mean(axis=0)
    se = out_d1.std(axis=0, ddof=1) / np.sqrt(replicas) if replicas > 1 else 0 * est
    return DecayCurve(times=times, estimate=est, std_error=se)


def _marginal_gap(model: Model, N: int, pair: CoupledPair) -> float:
    """Max deviation between coupled marginal move rates and single-copy rates."""
    first: dict[tuple, float] = {}
    second: dict[tuple, float] = {}
    for (i, i2, j, j2), r in coupled_rates(model, N, pair):
        if i != j:
            first[(i, j)] = first.get((i, j), 0.0) + r
        if i2 != j2:
            second[(i2, j2)] = second.get((i2, j2), 0.0) + r
    gap = 0.0
    for cfg, marg in ((pair.eta, first), (pair.eta_prime, second)):
        expected = dict(transition_rates(model, N, cfg))
        for key in expected.keys() | marg.keys():
            gap = max(gap, abs(expected.get(key, 0.0) - marg.get(key, 0.0)))
    return gap


def _drift(model: Model, N: int, pair: CoupledPair) -> float:
    """Generator of the coupling applied to d1 at the given pair."""
    eta = pair.eta.eta
    etap = pair.eta_prime.eta
    base = 0.5 * np.abs(eta - etap).sum()
    acc = 0.0
    for (i, i2, j, j2), r in coupled_rates(model, N, pair):
        na = eta.copy()
        nb = etap.copy()
        if i != j:
            na[i] -= 1
            na[j] += 1
        if i2 != j2:
            nb[i2] -= 1
            nb[j2] += 1
        acc += r * (0.5 * np.abs(na - nb).sum() - base)
    return acc


def coupling_consistency_check(model: Model, N: int, rho: float | None = None) -> dict:
    """Exact enumeration check of the coupling over all configuration pairs.

    Returns the largest marginal-rate mismatch and the largest violation of
    the contraction drift L d1 <= -rho * d1.  The pair space must satisfy
    |E|^2 <= 10^6.
    """
    from .oracle import enumerate_configurations

    space = enumerate_configurations(model.K, N)
    if len(space.configs) ** 2 > 10**6:
        raise ValueError("pair space too large to enumerate (|E|^2 > 1e6)")
    if rho is None:
        rho = ergodic_coefficients(model).rho
    max_gap = 0.0
    max_violation = -np.inf
    for ca in space.configs:
        for cb in space.configs:
            pair = CoupledPair(eta=ca, eta_prime=cb)
            max_gap = max(max_gap, _marginal_gap(model, N, pair))
            violation = _drift(model, N, pair) + rho * pair.d1
            max_violation = max(max_violation, violation)
    return {"max_marginal_gap": max_gap, "max_drift_violation": max_violation}
