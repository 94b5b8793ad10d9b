"""Killed-chain model, particle configurations and coupling-rate coefficients.

States of the live chain are indexed 0..K-1 throughout the package; the
absorbing cemetery state is implicit (a particle killed at site i would
leave the live set, and in the particle system it is instantly
redistributed instead).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

#: Convention used for the infimum defining ``lam``: the pair index runs over
#: ordered pairs (i, i') with i != i'.  The degenerate i == i' term is excluded.
LAMBDA_PAIR_CONVENTION = "ordered pairs i != i'"


class ModelError(ValueError):
    """Raised when a model violates one of its structural invariants."""


@dataclass(frozen=True)
class Model:
    """Finite killed Markov chain: jump rates ``Q`` and killing rates ``p0``.

    ``Q`` holds the off-diagonal transition rates (1/time); its diagonal is
    ignored on input and stored as zero.  ``p0[i]`` is the killing rate at
    site i.
    """

    K: int
    Q: np.ndarray
    p0: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {"K": self.K, "Q": self.Q.tolist(), "p0": self.p0.tolist()}
        )

    @staticmethod
    def from_json(text: str) -> "Model":
        obj = json.loads(text)
        return validate_model(
            Model(
                K=int(obj["K"]),
                Q=np.asarray(obj["Q"], dtype=float),
                p0=np.asarray(obj["p0"], dtype=float),
            )
        )


@dataclass(frozen=True)
class Configuration:
    """Occupation vector of the N-particle system: eta[i] particles at site i."""

    eta: np.ndarray
    N: int

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=np.int64)
        object.__setattr__(self, "eta", eta)
        if eta.min(initial=0) < 0:
            raise ValueError("occupation numbers must be nonnegative")
        if int(eta.sum()) != self.N:
            raise ValueError(
                f"occupation numbers sum to {int(eta.sum())}, expected N={self.N}"
            )


@dataclass(frozen=True)
class ErgodicCoefficients:
    """Contraction-rate coefficients of the coupling argument.

    ``lam`` mixes the underlying Q-dynamics, ``alpha`` is the classical
    ergodic coefficient (always <= lam), ``rho = lam - (max p0 - min p0)``
    is the Wasserstein contraction rate of the particle system and
    ``rho_prime`` its joint-bound refinement.
    """

    lam: float
    alpha: float
    rho: float
    rho_prime: float
    pair_convention: str = field(default=LAMBDA_PAIR_CONVENTION, compare=False)


def validate_model(model: Model) -> Model:
    """Check all structural invariants and return the model with diag(Q) = 0.

    Raises ModelError naming the violated invariant.
    """
    K = model.K
    if K < 2:
        raise ModelError(f"invalid model: K must be >= 2, got {K}")
    Q = np.array(model.Q, dtype=float)
    if Q.shape != (K, K):
        raise ModelError(f"invalid model: Q must be {K}x{K}, got {Q.shape}")
    np.fill_diagonal(Q, 0.0)
    if np.any(Q < 0):
        raise ModelError("invalid model: negative off-diagonal rate in Q")
    p0 = np.asarray(model.p0, dtype=float)
    if p0.shape != (K,):
        raise ModelError(f"invalid model: p0 must have length {K}")
    if np.any(p0 < 0):
        raise ModelError("invalid model: negative killing rate in p0")
    if not np.any(p0 > 0):
        raise ModelError("invalid model: p0 identically zero")
    if not _irreducible(Q):
        raise ModelError("invalid model: reducible Q")
    return Model(K=K, Q=Q, p0=p0)


def _irreducible(Q: np.ndarray) -> bool:
    """Strong connectivity of the positive-rate digraph, by double BFS."""
    adj = Q > 0
    return _reaches_all(adj, 0) and _reaches_all(adj.T, 0)


def _reaches_all(adj: np.ndarray, start: int) -> bool:
    K = adj.shape[0]
    seen = np.zeros(K, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        i = stack.pop()
        for j in np.nonzero(adj[i] & ~seen)[0]:
            seen[j] = True
            stack.append(int(j))
    return bool(seen.all())


def ergodic_coefficients(model: Model) -> ErgodicCoefficients:
    """Compute lam, alpha, rho and rho' for a validated model.

    lam  = min over ordered pairs i != i' of
           Q[i,i'] + Q[i',i] + sum_{j != i,i'} min(Q[i,j], Q[i',j])
    alpha = sum_j min_{i != j} Q[i,j]
    rho  = lam - (max p0 - min p0)
    rho' = min over pairs of (min(p0_i, p0_i') + same Q sum) - max p0
    """
    K, Q, p0 = model.K, model.Q, model.p0
    lam = np.inf
    rho_prime = np.inf
    for i in range(K):
        for i2 in range(K):
            if i == i2:
                continue
            mins = np.minimum(Q[i], Q[i2])
            mins[i] = 0.0
            mins[i2] = 0.0
            base = Q[i, i2] + Q[i2, i] + mins.sum()
            lam = min(lam, base)
            rho_prime = min(rho_prime, min(p0[i], p0[i2]) + base)
    # alpha: column-wise infimum over rows i != j
    alpha = 0.0
    for j in range(K):
        col = np.delete(Q[:, j], j)
        alpha += col.min()
    rho = lam - (p0.max() - p0.min())
    return ErgodicCoefficients(
        lam=float(lam),
        alpha=float(alpha),
        rho=float(rho),
        rho_prime=float(rho_prime - p0.max()),
    )


def d1_distance(x: Configuration, y: Configuration) -> float:
    """Half the L1 distance between occupation vectors.

    Equals N times the total-variation distance of the empirical measures.
    """
    if x.eta.shape != y.eta.shape:
        raise ValueError("configurations live on different state spaces")
    if x.N != y.N:
        raise ValueError(f"particle counts differ: {x.N} != {y.N}")
    return 0.5 * float(np.abs(x.eta - y.eta).sum())


def total_variation(mu: np.ndarray, nu: np.ndarray) -> float:
    """Total variation distance (1/2) sum |mu_i - nu_i| between two laws."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValueError("probability vectors have different lengths")
    for name, v in (("mu", mu), ("nu", nu)):
        if abs(v.sum() - 1.0) > 1e-12:
            raise ValueError(f"{name} is not normalized (sum={v.sum()!r})")
    return 0.5 * float(np.abs(mu - nu).sum())
