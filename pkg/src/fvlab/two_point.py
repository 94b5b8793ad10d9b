"""Two-site system: birth-death marginal, invariant law and spectral-gap bounds.

With two sites the count at site 2 is itself a birth-death chain on
{0..N}, which gives a product-form invariant law, Hardy-type lower
bounds on the spectral gap, and an exact gap by a tridiagonal
eigensolve.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .model import Model, validate_model

BD_EXACT_GUARD = 5000


def tp_model(a: float, b: float, p1: float, p2: float) -> Model:
    """Two-state model: site 1 -> 2 at rate a, 2 -> 1 at rate b, killing (p1, p2)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    return validate_model(
        Model(K=2, Q=np.array([[0.0, a], [b, 0.0]]), p0=np.array([float(p1), float(p2)]))
    )


@dataclass(frozen=True)
class BirthDeathChain:
    """Birth-death chain on {0..N}: b[n] is the up-rate from n (n = 0..N-1),
    d[n] the down-rate from n+1 (so d_0 = b_N = 0 by convention)."""

    N: int
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        if self.b.shape != (self.N,) or self.d.shape != (self.N,):
            raise ValueError("rate arrays must have length N")
        if self.b.min() <= 0 or self.d.min() <= 0:
            raise ValueError("rates must be positive")

    def up(self, n: int) -> float:
        return float(self.b[n]) if 0 <= n < self.N else 0.0

    def down(self, n: int) -> float:
        return float(self.d[n - 1]) if 1 <= n <= self.N else 0.0


def bd_marginal(a: float, b: float, p1: float, p2: float, N: int) -> BirthDeathChain:
    """Chain followed by the count at site 1.

    b_n = (N-n)(b + p2 n/(N-1)) and d_n = n(a + p1 (N-n)/(N-1)): a particle
    arrives at site 1 by jumping from site 2 (rate b) or by being reborn on
    one of the n survivors there after a killing at site 2 (rate p2), and
    symmetrically for departures.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    n = np.arange(N)
    births = (N - n) * (b + p2 * n / (N - 1))
    m = np.arange(1, N + 1)
    deaths = m * (a + p1 * (N - m) / (N - 1))
    return BirthDeathChain(N=N, b=births, d=deaths)


def bd_invariant(chain: BirthDeathChain) -> np.ndarray:
    """Reversible law pi(n) proportional to prod_{k<=n} b_{k-1}/d_k, in log space."""
    logpi = np.zeros(chain.N + 1)
    logpi[1:] = np.cumsum(np.log(chain.b) - np.log(chain.d))
    logpi -= logpi.max()
    pi = np.exp(logpi)
    return pi / pi.sum()


def hardy_quantities(chain: BirthDeathChain, i: int, pi: np.ndarray | None = None) -> dict:
    """Hardy functionals at the split point i.

    B_plus(i) = max_{x>i} (sum_{y=i+1}^{x} 1/(pi(y) d_y)) * pi([x, N]) and
    B_minus(i) = max_{x<i} (sum_{y=x}^{i-1} 1/(pi(y) b_y)) * pi([0, x]);
    empty maxima are 0.  Both are invariant under rescaling of pi.
    """
    if not 0 <= i <= chain.N:
        raise ValueError("i must lie in 0..N")
    if pi is None:
        pi = bd_invariant(chain)
    tail = np.concatenate((np.cumsum(pi[::-1])[::-1], [0.0]))  # tail[x] = pi([x, N])
    head = np.cumsum(pi)  # head[x] = pi([0, x])
    b_plus = 0.0
    acc = 0.0
    for x in range(i + 1, chain.N + 1):
        acc += 1.0 / (pi[x] * chain.down(x))
        b_plus = max(b_plus, acc * tail[x])
    b_minus = 0.0
    acc = 0.0
    for x in range(i - 1, -1, -1):
        acc += 1.0 / (pi[x] * chain.up(x))
        b_minus = max(b_minus, acc * head[x])
    return {"B_plus": b_plus, "B_minus": b_minus}


@dataclass(frozen=True)
class HardyReport:
    i_star: int
    B_plus: float
    B_minus: float
    gap_lower_bound: float
    i1: float
    i2: float
    unimodal: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def ratio_monotone_regime(a: float, b: float, p1: float, p2: float, N: int) -> bool:
    """Whether monotonicity of the ratios pi(i+1)/pi(i) is guaranteed.

    The ratios are strictly decreasing whenever a(N-1) >= p1 and
    b(N-1) >= p2.  Outside this regime the property can fail -- e.g.
    a=1.3158, b=1.4903, p1=2.7223, p2=1.0719, N=2 gives increasing
    ratios (0.738, 0.974) -- and pi itself can even be bimodal.
    """
    return a * (N - 1) >= p1 and b * (N - 1) >= p2


def _is_unimodal(pi: np.ndarray) -> bool:
    # the successive ratios pi(i+1)/pi(i) must be strictly decreasing
    ratios = pi[1:] / pi[:-1]
    return bool(np.all(np.diff(ratios) < 0))


def _mode_roots(a: float, b: float, p1: float, p2: float, N: int):
    """Roots i1 <= i2 of the quadratic controlling pi(i+1)/pi(i) - 1; needs p1 > p2."""
    lin = N * (a + b + p1 - p2) - (a + b + 2 * p1)
    delta = lin * lin - 4 * (N - 1) * (b * N - a - p1) * (p1 - p2)
    if delta < 0:
        return None
    root = np.sqrt(delta)
    return (lin - root) / (2 * (p1 - p2)), (lin + root) / (2 * (p1 - p2))


def gap_report(a: float, b: float, p1: float, p2: float, N: int) -> HardyReport:
    """Hardy lower bound on the spectral gap of the site-2 marginal chain.

    The split point i_star is the mode of pi: floor(i1) + 1 from the root
    formula when p1 > p2, argmax of pi otherwise.  The p1 < p2 case is
    mapped through the mirror symmetry n <-> N - n (swap sites), which
    also swaps B_plus and B_minus.  The unimodal flag reports whether the
    ratios pi(i+1)/pi(i) are strictly decreasing; that is guaranteed in
    the ratio_monotone_regime but can fail outside it.
    """
    if p1 < p2:
        mirror = gap_report(b, a, p2, p1, N)
        return HardyReport(
            i_star=N - mirror.i_star,
            B_plus=mirror.B_minus,
            B_minus=mirror.B_plus,
            gap_lower_bound=mirror.gap_lower_bound,
            i1=N - mirror.i2,
            i2=N - mirror.i1,
            unimodal=mirror.unimodal,
        )
    chain = bd_marginal(a, b, p1, p2, N)
    pi = bd_invariant(chain)
    roots = _mode_roots(a, b, p1, p2, N) if p1 > p2 else None
    if roots is None:
        i1 = i2 = float("nan")
        i_star = int(np.argmax(pi))
    else:
        i1, i2 = roots
        i_star = min(max(int(np.floor(i1)) + 1, 0), N)
    quantities = hardy_quantities(chain, i_star, pi)
    return HardyReport(
        i_star=i_star,
        B_plus=quantities["B_plus"],
        B_minus=quantities["B_minus"],
        gap_lower_bound=1.0 / (4.0 * max(quantities["B_plus"], quantities["B_minus"])),
        i1=float(i1),
        i2=float(i2),
        unimodal=_is_unimodal(pi),
    )


def lambda_u(chain: BirthDeathChain, u: np.ndarray) -> float:
    """Variational lower bound on the gap from a positive weight sequence.

    lambda_u = min_{k in 0..N-1} [d_{k+1} - d_k u_{k-1}/u_k + b_k
    - b_{k+1} u_{k+1}/u_k], with out-of-range rates and weights dropped.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (chain.N,):
        raise ValueError("u must have length N")
    if u.min() <= 0:
        raise ValueError("weights must be positive")
    vals = np.empty(chain.N)
    for k in range(chain.N):
        v = chain.down(k + 1) + chain.up(k)
        if k >= 1:
            v -= chain.down(k) * u[k - 1] / u[k]
        if k + 1 < chain.N:
            v -= chain.up(k + 1) * u[k + 1] / u[k]
        vals[k] = v
    return float(vals.min())


def bd_gap_exact(chain: BirthDeathChain) -> float:
    """Smallest nonzero eigenvalue of the negated generator.

    Uses the detailed-balance similarity transform: the symmetrized
    tridiagonal matrix has off-diagonal sqrt(b_n d_{n+1}) and shares the
    spectrum of the generator.
    """
    if chain.N > BD_EXACT_GUARD:
        raise ValueError(f"chain too large for dense eigensolve (N > {BD_EXACT_GUARD})")
    diag = np.zeros(chain.N + 1)
    for x in range(chain.N + 1):
        diag[x] = chain.up(x) + chain.down(x)
    off = np.sqrt(chain.b * chain.d)
    vals = scipy.linalg.eigh_tridiagonal(diag, -off, eigvals_only=True)
    return float(np.sort(vals)[1])
