"""Brute-force linear-algebra ground truth on enumerable configuration spaces.

Everything here is dense and guarded by explicit size limits; these
routines exist to certify the closed forms and the Monte Carlo estimators
on desk-scale instances, not to scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg

from .model import Configuration, Model
from .simulate import transition_rates

ENUMERATION_GUARD = 10**6
SPECTRUM_GUARD = 3000


@dataclass(frozen=True)
class EnumeratedSpace:
    """All occupation vectors with K sites and N particles, in a fixed order."""

    K: int
    N: int
    configs: list
    index: dict

    def __len__(self):
        return len(self.configs)


def enumerate_configurations(K: int, N: int) -> EnumeratedSpace:
    """Lexicographic (first coordinate descending) enumeration of the space."""
    size = comb(N + K - 1, K - 1)
    if size > ENUMERATION_GUARD:
        raise ValueError(f"state space too large to enumerate ({size} > {ENUMERATION_GUARD})")
    configs = []
    vec = np.zeros(K, dtype=np.int64)

    def rec(pos: int, remaining: int):
        if pos == K - 1:
            vec[pos] = remaining
            configs.append(Configuration(eta=vec.copy(), N=N))
            return
        for x in range(remaining, -1, -1):
            vec[pos] = x
            rec(pos + 1, remaining - x)

    rec(0, N)
    index = {tuple(c.eta.tolist()): i for i, c in enumerate(configs)}
    return EnumeratedSpace(K=K, N=N, configs=configs, index=index)


def generator_matrix(model: Model, N: int, space: EnumeratedSpace | None = None) -> np.ndarray:
    """Dense generator of the particle system over the enumerated space."""
    if space is None:
        space = enumerate_configurations(model.K, N)
    n = len(space)
    L = np.zeros((n, n))
    for a, cfg in enumerate(space.configs):
        for (i, j), r in transition_rates(model, N, cfg):
            target = cfg.eta.copy()
            target[i] -= 1
            target[j] += 1
            b = space.index[tuple(target.tolist())]
            L[a, b] += r
            L[a, a] -= r
    return L


def coupled_generator_matrix(
    model: Model, N: int, space: EnumeratedSpace | None = None
) -> np.ndarray:
    """Dense generator of the two-copy coupling over pairs of configurations."""
    from .coupling import CoupledPair, coupled_rates

    if space is None:
        space = enumerate_configurations(model.K, N)
    n = len(space)
    if n * n > ENUMERATION_GUARD:
        raise ValueError("pair space too large to enumerate")
    LL = np.zeros((n * n, n * n))
    for a, ca in enumerate(space.configs):
        for b, cb in enumerate(space.configs):
            row = a * n + b
            for (i, i2, j, j2), r in coupled_rates(model, N, CoupledPair(ca, cb)):
                ta = ca.eta.copy()
                tb = cb.eta.copy()
                if i != j:
                    ta[i] -= 1
                    ta[j] += 1
                if i2 != j2:
                    tb[i2] -= 1
                    tb[j2] += 1
                col = space.index[tuple(ta.tolist())] * n + space.index[tuple(tb.tolist())]
                if col != row:
                    LL[row, col] += r
                    LL[row, row] -= r
    return LL


def _left_null_distribution(L: np.ndarray) -> np.ndarray:
    """Normalized solution of x L = 0, via the augmented dense system."""
    n = L.shape[0]
    A = L.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    x = np.linalg.solve(A, b)
    residual = np.abs(x @ L).max()
    if residual > 1e-10 * max(1.0, np.abs(L).max()):
        raise RuntimeError(f"stationary solve residual too large: {residual}")
    if x.min() < -1e-12:
        raise RuntimeError("stationary solve produced negative mass")
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def stationary_exact(model_or_chain, N: int | None = None) -> np.ndarray:
    """Exact stationary law of the particle system or of a birth-death chain."""
    if hasattr(model_or_chain, "b") and hasattr(model_or_chain, "d"):
        return _left_null_distribution(birth_death_generator(model_or_chain))
    if N is None:
        raise ValueError("N is required for a particle-system model")
    return _left_null_distribution(generator_matrix(model_or_chain, N))


def birth_death_generator(chain) -> np.ndarray:
    """Dense tridiagonal generator of a birth-death chain on 0..N."""
    n = chain.N + 1
    G = np.zeros((n, n))
    for x in range(n):
        if x < chain.N:
            G[x, x + 1] = chain.b[x]
        if x > 0:
            G[x, x - 1] = chain.d[x - 1]
        G[x, x] = -G[x].sum()
    return G


def semigroup_apply(L: np.ndarray, f: np.ndarray, t: float, tail: float = 1e-14) -> np.ndarray:
    """e^{tL} f by uniformization (Poisson mixture of powers of I + L/c).

    Positivity preserving; the Poisson series is truncated once the
    accumulated weight exceeds 1 - tail.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = L.shape[0]
    c = 1.01 * np.abs(np.diag(L)).max()
    if c == 0 or t == 0:
        return f.astype(float).copy()
    P = np.eye(n) + L / c
    ct = c * t
    w = np.exp(-ct)
    v = f.astype(float).copy()
    acc = w * v
    total = w
    k = 0
    while total < 1.0 - tail:
        k += 1
        v = P @ v
        w *= ct / k
        acc += w * v
        total += w
        if k > 100 * (ct + 10):  # pragma: no cover - safety valve
            raise RuntimeError("uniformization failed to converge")
    return acc


def transient_covariance(
    model: Model, N: int, eta0: Configuration, k: int, l: int, t: float
) -> float:
    """Exact cov(eta_t(k), eta_t(l)) started from the deterministic eta0."""
    space = enumerate_configurations(model.K, N)
    L = generator_matrix(model, N, space)
    fk = np.array([c.eta[k] for c in space.configs], dtype=float)
    fl = np.array([c.eta[l] for c in space.configs], dtype=float)
    a = space.index[tuple(eta0.eta.tolist())]
    ek = semigroup_apply(L, fk, t)[a]
    el = semigroup_apply(L, fl, t)[a]
    ekl = semigroup_apply(L, fk * fl, t)[a]
    return float(ekl - ek * el)


def transient_mean(model: Model, N: int, eta0: Configuration, t: float) -> np.ndarray:
    """Exact E[eta_t] started from the deterministic eta0."""
    space = enumerate_configurations(model.K, N)
    L = generator_matrix(model, N, space)
    a = space.index[tuple(eta0.eta.tolist())]
    return np.array(
        [
            semigroup_apply(L, np.array([c.eta[k] for c in space.configs], float), t)[a]
            for k in range(model.K)
        ]
    )


def spectrum(matrix: np.ndarray, reversible: bool = False) -> np.ndarray:
    """Sorted real parts of the eigenvalues of a dense generator.

    With ``reversible=True`` the matrix is symmetrized through detailed
    balance (off-diagonal entries replaced by sqrt(L_xy * L_yx)), which
    avoids forming the stationary weights and keeps the solve symmetric.
    """
    n = matrix.shape[0]
    if n > SPECTRUM_GUARD:
        raise ValueError(f"matrix too large for dense spectrum ({n} > {SPECTRUM_GUARD})")
    if reversible:
        S = np.sqrt(matrix * matrix.T)
        np.fill_diagonal(S, np.diag(matrix))
        return np.sort(scipy.linalg.eigvalsh(S))
    return np.sort(np.linalg.eigvals(matrix).real)


def carre_du_champ(model: Model, N: int, f, config: Configuration) -> float:
    """Rate-weighted sum of squared jump increments of f at one configuration."""
    base = f(config.eta)
    acc = 0.0
    for (i, j), r in transition_rates(model, N, config):
        target = config.eta.copy()
        target[i] -= 1
        target[j] += 1
        acc += r * (f(target) - base) ** 2
    return float(acc)
