"""Event-driven simulation kernels.

Every kernel is written once in plain nopython-compatible Python and
compiled with numba unless the environment variable ``FVLAB_NO_NUMBA`` is
set (any non-empty value), in which case the same source runs as ordinary
Python over numpy arrays.  Numba's ``np.random`` is the same Mersenne
Twister as numpy's legacy global generator, so both backends produce
bit-identical sample paths for a given seed.

All kernels use competing exponential clocks (no time discretization):
sample a holding time from the total rate, pick a move proportionally to
its rate, repeat.  Grid recording stores the state that holds just before
each requested time.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = not os.environ.get("FVLAB_NO_NUMBA")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is an optional extra
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"

_SEED_MOD = 2**32


def _jit(fn):
    if USE_NUMBA:
        return njit(cache=True)(fn)
    return fn


def replica_seed(seed: int, replica: int) -> int:
    """Seed for one replica: 32-bit window of splitmix64(seed), offset by index."""
    z = (int(seed) + 0x9E3779B97F4A7C15) % 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 % 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB % 2**64
    z ^= z >> 31
    return (z + replica) % _SEED_MOD


def seed_backend(seed):
    """Seed the RNG actually used by the kernels.

    Under numba the compiled kernels draw from numba's internal state,
    which only np.random.seed *inside* jitted code can set; the pure
    path uses numpy's global legacy generator.  Both are MT19937, so a
    given seed yields the same stream either way.
    """
    np.random.seed(seed)


seed_backend = _jit(seed_backend)


def _single_site_rate(qrow, p0, N, eta, i):
    return eta[i] * (qrow[i] + p0[i] * (N - eta[i]) / (N - 1))


_single_site_rate = _jit(_single_site_rate)


def _sim_chain(Q, qrow, p0, N, eta, times, out):
    """One exact trajectory; records eta into out[g] at each grid time."""
    K = eta.shape[0]
    T = times.shape[0]
    t = 0.0
    g = 0
    while g < T:
        R = 0.0
        for i in range(K):
            if eta[i] > 0:
                R += _single_site_rate(qrow, p0, N, eta, i)
        if R <= 0.0:
            for h in range(g, T):
                out[h] = eta
            return
        t += np.random.exponential(1.0) / R
        while g < T and times[g] < t:
            out[g] = eta
            g += 1
        if g >= T:
            return
        u = np.random.random() * R
        acc = 0.0
        isrc = -1
        for i in range(K):
            if eta[i] > 0:
                isrc = i
                acc += _single_site_rate(qrow, p0, N, eta, i)
                if acc > u:
                    break
        # pick the destination within the chosen source site
        v = np.random.random() * (qrow[isrc] + p0[isrc] * (N - eta[isrc]) / (N - 1))
        acc = 0.0
        jdst = -1
        for j in range(K):
            if j == isrc:
                continue
            r = Q[isrc, j] + p0[isrc] * eta[j] / (N - 1)
            if r > 0.0:
                jdst = j
                acc += r
                if acc > v:
                    break
        if jdst >= 0:
            eta[isrc] -= 1
            eta[jdst] += 1


_sim_chain = _jit(_sim_chain)


def _ensemble_chain(Q, qrow, p0, N, eta0, times, seed, replicas, out):
    """Independent replicas of _sim_chain; out has shape (replicas, T, K)."""
    for r in range(replicas):
        np.random.seed((seed + r) % 4294967296)
        eta = eta0.copy()
        _sim_chain(Q, qrow, p0, N, eta, times, out[r])


_ensemble_chain = _jit(_ensemble_chain)


def _emit_coupled(Q, p0, N, eta, etap, ia, ja, ib, jb, rates):
    """Build the full coupled-jump clause list for the pair (eta, etap).

    Writes clauses into the preallocated arrays and returns their count.
    Clause (ia, ja, ib, jb) moves one first-copy particle ia->ja and one
    second-copy particle ib->jb; ia == ja (resp. ib == jb) means the copy
    does not move.  Pure-identity clauses are never emitted.

    Clause families: matched couples jump together through Q or die
    together and land on a matched (same-site) or unmatched (split-site)
    particle; unmatched particles are paired across copies with weight
    pos(i) * neg(i') / d1 and follow matched-rate Q moves, coalescing
    jumps, joint deaths and solo deaths.
    """
    K = eta.shape[0]
    d1 = 0
    summ = 0
    for k in range(K):
        d = eta[k] - etap[k]
        if d > 0:
            d1 += d
        summ += min(eta[k], etap[k])
    n = 0
    inv = 1.0 / (N - 1)
    for i in range(K):
        c = min(eta[i], etap[i])
        if c == 0:
            continue
        for j in range(K):
            if j != i and Q[i, j] > 0.0:
                ia[n] = i
                ja[n] = j
                ib[n] = i
                jb[n] = j
                rates[n] = c * Q[i, j]
                n += 1
        if p0[i] > 0.0:
            for j in range(K):
                if j == i:
                    continue
                m = min(eta[j], etap[j])
                if m > 0:
                    ia[n] = i
                    ja[n] = j
                    ib[n] = i
                    jb[n] = j
                    rates[n] = c * p0[i] * m * inv
                    n += 1
            if d1 > 0:
                f = c * p0[i] * inv / d1
                for j in range(K):
                    pj = eta[j] - etap[j]
                    if pj <= 0:
                        continue
                    for j2 in range(K):
                        nj = etap[j2] - eta[j2]
                        if nj <= 0:
                            continue
                        ia[n] = i
                        ja[n] = j
                        ib[n] = i
                        jb[n] = j2
                        rates[n] = f * pj * nj
                        n += 1
    if d1 == 0:
        return n
    for i in range(K):
        pi = eta[i] - etap[i]
        if pi <= 0:
            continue
        for i2 in range(K):
            ni = etap[i2] - eta[i2]
            if ni <= 0:
                continue
            w = pi * ni / d1
            for j in range(K):
                if j == i or j == i2:
                    continue
                mn = min(Q[i, j], Q[i2, j])
                if mn > 0.0:
                    ia[n] = i
                    ja[n] = j
                    ib[n] = i2
                    jb[n] = j
                    rates[n] = w * mn
                    n += 1
                dq = Q[i, j] - Q[i2, j]
                if dq > 0.0:
                    ia[n] = i
                    ja[n] = j
                    ib[n] = i2
                    jb[n] = i2
                    rates[n] = w * dq
                    n += 1
                elif dq < 0.0:
                    ia[n] = i
                    ja[n] = i
                    ib[n] = i2
                    jb[n] = j
                    rates[n] = -w * dq
                    n += 1
            if Q[i, i2] > 0.0:
                ia[n] = i
                ja[n] = i2
                ib[n] = i2
                jb[n] = i2
                rates[n] = w * Q[i, i2]
                n += 1
            if Q[i2, i] > 0.0:
                ia[n] = i
                ja[n] = i
                ib[n] = i2
                jb[n] = i
                rates[n] = w * Q[i2, i]
                n += 1
            pmin = min(p0[i], p0[i2])
            if pmin > 0.0:
                for j in range(K):
                    m = min(eta[j], etap[j])
                    if m > 0:
                        ia[n] = i
                        ja[n] = j
                        ib[n] = i2
                        jb[n] = j
                        rates[n] = w * pmin * m * inv
                        n += 1
                f2 = w * pmin * inv / d1
                for j in range(K):
                    pj = eta[j] - etap[j]
                    if pj <= 0:
                        continue
                    for j2 in range(K):
                        nj = etap[j2] - eta[j2]
                        if nj <= 0:
                            continue
                        if j == i and j2 == i2:
                            continue
                        ia[n] = i
                        ja[n] = j
                        ib[n] = i2
                        jb[n] = j2
                        rates[n] = f2 * pj * nj
                        n += 1
            dp = p0[i] - p0[i2]
            if dp > 0.0:
                for j in range(K):
                    if j != i and eta[j] > 0:
                        ia[n] = i
                        ja[n] = j
                        ib[n] = i2
                        jb[n] = i2
                        rates[n] = w * dp * eta[j] * inv
                        n += 1
            elif dp < 0.0:
                for j2 in range(K):
                    if j2 != i2 and etap[j2] > 0:
                        ia[n] = i
                        ja[n] = i
                        ib[n] = i2
                        jb[n] = j2
                        rates[n] = -w * dp * etap[j2] * inv
                        n += 1
    return n


_emit_coupled = _jit(_emit_coupled)


def coupled_clause_capacity(K: int) -> int:
    """Upper bound on the clause count emitted by _emit_coupled."""
    couples = K * (K - 1) * 2 + K * K * K
    pairs = K * K * (3 * K + 2 + K + K * K + K)
    return couples + pairs + 8


coupled_clause_capacity = _jit(coupled_clause_capacity)


def _sim_pair(Q, p0, N, eta, etap, times, out_a, out_b, ia, ja, ib, jb, rates):
    """One trajectory of the coupled pair; records both copies at grid times."""
    T = times.shape[0]
    t = 0.0
    g = 0
    while g < T:
        n = _emit_coupled(Q, p0, N, eta, etap, ia, ja, ib, jb, rates)
        R = 0.0
        for k in range(n):
            R += rates[k]
        if R <= 0.0:
            for h in range(g, T):
                out_a[h] = eta
                out_b[h] = etap
            return
        t += np.random.exponential(1.0) / R
        while g < T and times[g] < t:
            out_a[g] = eta
            out_b[g] = etap
            g += 1
        if g >= T:
            return
        u = np.random.random() * R
        acc = 0.0
        sel = n - 1
        for k in range(n):
            acc += rates[k]
            if acc > u:
                sel = k
                break
        if ia[sel] != ja[sel]:
            eta[ia[sel]] -= 1
            eta[ja[sel]] += 1
        if ib[sel] != jb[sel]:
            etap[ib[sel]] -= 1
            etap[jb[sel]] += 1


_sim_pair = _jit(_sim_pair)


def _ensemble_pair_d1(Q, p0, N, eta0, etap0, times, seed, replicas, out_d1):
    """Replicated coupled trajectories; out_d1[r, g] = d1 distance at times[g]."""
    K = eta0.shape[0]
    T = times.shape[0]
    cap = coupled_clause_capacity(K)
    ia = np.empty(cap, dtype=np.int64)
    ja = np.empty(cap, dtype=np.int64)
    ib = np.empty(cap, dtype=np.int64)
    jb = np.empty(cap, dtype=np.int64)
    rates = np.empty(cap, dtype=np.float64)
    out_a = np.empty((T, K), dtype=np.int64)
    out_b = np.empty((T, K), dtype=np.int64)
    for r in range(replicas):
        np.random.seed((seed + r) % 4294967296)
        eta = eta0.copy()
        etap = etap0.copy()
        _sim_pair(Q, p0, N, eta, etap, times, out_a, out_b, ia, ja, ib, jb, rates)
        for g in range(T):
            s = 0
            for k in range(K):
                d = out_a[g, k] - out_b[g, k]
                if d > 0:
                    s += d
            out_d1[r, g] = s


_ensemble_pair_d1 = _jit(_ensemble_pair_d1)
