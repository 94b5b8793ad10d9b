"""Exact event-driven simulation of the N-particle redistribution system.

A particle at site i jumps to j at rate Q[i,j] and is killed at rate
p0[i]; a killed particle lands on one of the N-1 surviving particles
chosen uniformly, so the move i -> j happens at configuration rate
eta(i) * (Q[i,j] + p0[i] * eta(j) / (N-1)).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Configuration, Model


@dataclass(frozen=True)
class SimulationSpec:
    model: Model
    N: int
    t_end: float
    seed: int
    replicas: int = 1

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2 (redistribution divides by N-1)")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")


@dataclass(frozen=True)
class EnsembleStatistics:
    """Monte Carlo occupation moments on a time grid.

    mean_occupation[g, k] estimates E[eta_t(k)] at times[g]; covariance is
    the (K, K) sample covariance matrix per grid time.  standard_errors
    and covariance_se carry the matching Monte Carlo errors.
    """

    times: np.ndarray
    mean_occupation: np.ndarray
    covariance: np.ndarray
    standard_errors: np.ndarray
    covariance_se: np.ndarray
    replicas: int


def transition_rates(model: Model, N: int, config: Configuration):
    """All positive-rate moves ((i, j), rate) out of a configuration."""
    eta = config.eta
    out = []
    for i in range(model.K):
        if eta[i] == 0:
            continue
        for j in range(model.K):
            if j == i:
                continue
            r = eta[i] * (model.Q[i, j] + model.p0[i] * eta[j] / (N - 1))
            if r > 0:
                out.append(((i, j), float(r)))
    return out


def total_rate(model: Model, N: int, config: Configuration) -> float:
    return sum(r for _, r in transition_rates(model, N, config))


def _grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d grid")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("times must be sorted and nonnegative")
    return times


def simulate(spec: SimulationSpec, eta0: Configuration) -> Configuration:
    """One exact trajectory endpoint at t_end, deterministic given the seed."""
    if eta0.N != spec.N or eta0.eta.shape[0] != spec.model.K:
        raise ValueError("eta0 inconsistent with spec")
    times = np.array([spec.t_end], dtype=float)
    out = np.empty((1, spec.model.K), dtype=np.int64)
    qrow = spec.model.Q.sum(axis=1)
    eta = eta0.eta.copy()
    _kernels.seed_backend(_kernels.replica_seed(spec.seed, 0))
    _kernels._sim_chain(spec.model.Q, qrow, spec.model.p0, spec.N, eta, times, out)
    return Configuration(eta=out[0], N=spec.N)


def sample_paths(spec: SimulationSpec, eta0: Configuration, times) -> np.ndarray:
    """Raw replica-by-grid occupation samples, shape (replicas, T, K).

    Replica r runs on its own stream seeded from (seed, r); accumulation
    order over replicas is fixed, so results do not depend on scheduling.
    """
    if eta0.N != spec.N or eta0.eta.shape[0] != spec.model.K:
        raise ValueError("eta0 inconsistent with spec")
    times = _grid(times)
    if times[-1] > spec.t_end:
        raise ValueError("grid extends past t_end")
    out = np.empty((spec.replicas, times.size, spec.model.K), dtype=np.int64)
    qrow = spec.model.Q.sum(axis=1)
    _kernels._ensemble_chain(
        spec.model.Q,
        qrow,
        spec.model.p0,
        spec.N,
        eta0.eta,
        times,
        _kernels.replica_seed(spec.seed, 0),
        spec.replicas,
        out,
    )
    return out


def ensemble_statistics(
    spec: SimulationSpec, eta0: Configuration, times
) -> EnsembleStatistics:
    """Replica-averaged occupation means and covariances with standard errors."""
    if spec.replicas < 2:
        raise ValueError("replicas must be >= 2 to estimate covariances")
    samples = sample_paths(spec, eta0, times).astype(float)
    R = spec.replicas
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(R)
    centered = samples - mean[None, :, :]
    # products[r, g, k, l] = centered_k * centered_l per replica
    products = centered[:, :, :, None] * centered[:, :, None, :]
    cov = products.sum(axis=0) / (R - 1)
    cov_se = products.std(axis=0, ddof=1) / np.sqrt(R)
    return EnsembleStatistics(
        times=_grid(times),
        mean_occupation=mean,
        covariance=cov,
        standard_errors=se,
        covariance_se=cov_se,
        replicas=R,
    )


def statistics_to_csv(stats: EnsembleStatistics) -> str:
    """Per-site moments: columns time, k, mean, var, se."""
    buf = io.StringIO()
    buf.write("time,k,mean,var,se\n")
    K = stats.mean_occupation.shape[1]
    for g, t in enumerate(stats.times):
        for k in range(K):
            buf.write(
                f"{float(t)!r},{k},{float(stats.mean_occupation[g, k])!r},"
                f"{float(stats.covariance[g, k, k])!r},{float(stats.standard_errors[g, k])!r}\n"
            )
    return buf.getvalue()


def covariances_to_csv(stats: EnsembleStatistics) -> str:
    """Pairwise covariances in long format: time, k, l, cov, se."""
    buf = io.StringIO()
    buf.write("time,k,l,cov,se\n")
    K = stats.mean_occupation.shape[1]
    for g, t in enumerate(stats.times):
        for k in range(K):
            for l in range(k + 1, K):
                buf.write(
                    f"{float(t)!r},{k},{l},{float(stats.covariance[g, k, l])!r},"
                    f"{float(stats.covariance_se[g, k, l])!r}\n"
                )
    return buf.getvalue()
