import json

import numpy as np
import pytest

from fvlab import ergodic_coefficients
from fvlab.oracle import birth_death_generator, spectrum, stationary_exact
from fvlab.two_point import (
    BirthDeathChain,
    bd_gap_exact,
    bd_invariant,
    bd_marginal,
    gap_report,
    hardy_quantities,
    lambda_u,
    ratio_monotone_regime,
    tp_model,
)


def test_tp_model_rates():
    m = tp_model(1, 2, 3, 1)
    assert m.Q[0, 1] == 1.0 and m.Q[1, 0] == 2.0
    np.testing.assert_allclose(m.p0, [3.0, 1.0])
    with pytest.raises(ValueError):
        tp_model(0, 1, 1, 1)


def test_tp_model_rho_identity():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a, b = rng.uniform(0.2, 3.0, 2)
        p1, p2 = rng.uniform(0.0, 2.0, 2)
        if p1 + p2 == 0:
            continue
        rho = ergodic_coefficients(tp_model(a, b, p1, p2)).rho
        assert rho == pytest.approx(a + b - abs(p1 - p2))
    assert ergodic_coefficients(tp_model(1, 1, 0.5, 0.5)).rho == pytest.approx(2.0)


def test_bd_marginal_hand_cases():
    ch = bd_marginal(1, 1, 1, 1, 2)
    np.testing.assert_allclose(ch.b, [2.0, 2.0])
    np.testing.assert_allclose(ch.d, [2.0, 2.0])
    ch = bd_marginal(1, 2, 3, 1, 3)
    np.testing.assert_allclose(ch.b, [6.0, 5.0, 3.0])
    np.testing.assert_allclose(ch.d, [4.0, 5.0, 3.0])


def test_bd_boundary_conventions():
    ch = bd_marginal(1, 2, 3, 1, 4)
    assert ch.up(4) == 0.0  # b_N = 0
    assert ch.down(0) == 0.0  # d_0 = 0
    assert ch.up(0) == ch.b[0]
    assert ch.down(4) == ch.d[3]


def test_bd_marginal_validation():
    with pytest.raises(ValueError):
        bd_marginal(1, 2, 3, 1, 1)
    with pytest.raises(ValueError):
        BirthDeathChain(N=2, b=np.array([1.0]), d=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        BirthDeathChain(N=2, b=np.array([1.0, 0.0]), d=np.array([1.0, 1.0]))


def test_bd_invariant_symmetric():
    np.testing.assert_allclose(bd_invariant(bd_marginal(1, 1, 1, 1, 2)), 1 / 3, atol=1e-14)


def test_bd_invariant_matches_complete_graph_marginal():
    # a = b = 1/2, p = 1/2 is the K=2 complete graph with p = 1/K
    np.testing.assert_allclose(bd_invariant(bd_marginal(0.5, 0.5, 0.5, 0.5, 2)), 1 / 3, atol=1e-14)


def test_bd_invariant_detailed_balance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.uniform(0.2, 3.0, 2)
        p1, p2 = rng.uniform(0.0, 2.0, 2)
        N = int(rng.integers(2, 40))
        ch = bd_marginal(a, b, p1, p2, N)
        pi = bd_invariant(ch)
        for n in range(N):
            assert abs(pi[n] * ch.b[n] - pi[n + 1] * ch.d[n]) <= 1e-12


def test_bd_invariant_matches_null_space_oracle():
    rng = np.random.default_rng(8)
    for _ in range(5):
        ch = bd_marginal(*rng.uniform(0.3, 2.5, 2), *rng.uniform(0.0, 2.0, 2), 12)
        exact = stationary_exact(ch)
        assert np.abs(bd_invariant(ch) - exact).max() <= 1e-10


def test_hardy_empty_ranges():
    ch = bd_marginal(1, 2, 3, 1, 6)
    assert hardy_quantities(ch, 6)["B_plus"] == 0.0
    assert hardy_quantities(ch, 0)["B_minus"] == 0.0
    with pytest.raises(ValueError):
        hardy_quantities(ch, 7)


def test_hardy_scale_invariance():
    ch = bd_marginal(1, 2, 3, 0, 15)
    pi = bd_invariant(ch)
    q1 = hardy_quantities(ch, 5, pi)
    q2 = hardy_quantities(ch, 5, pi * 7.5)
    assert q1["B_plus"] == pytest.approx(q2["B_plus"])
    assert q1["B_minus"] == pytest.approx(q2["B_minus"])


def test_gap_report_hand_case():
    rep = gap_report(1, 2, 2, 1, 3)
    assert rep.i1 == pytest.approx(2.0)
    assert rep.i2 == pytest.approx(3.0)
    assert rep.i_star == 3
    assert rep.unimodal
    assert rep.gap_lower_bound == pytest.approx(1.0 / (4 * max(rep.B_plus, rep.B_minus)))


def test_gap_report_equal_killing_uses_argmax():
    rep = gap_report(1, 2, 1, 1, 10)
    assert np.isnan(rep.i1) and np.isnan(rep.i2)
    pi = bd_invariant(bd_marginal(1, 2, 1, 1, 10))
    assert rep.i_star == int(np.argmax(pi))


def test_gap_report_mirror_symmetry():
    direct = gap_report(1, 2, 3, 0, 25)
    mirrored = gap_report(2, 1, 0, 3, 25)
    assert mirrored.i_star == 25 - direct.i_star
    assert mirrored.B_plus == pytest.approx(direct.B_minus)
    assert mirrored.B_minus == pytest.approx(direct.B_plus)
    assert mirrored.gap_lower_bound == pytest.approx(direct.gap_lower_bound)
    assert mirrored.i1 == pytest.approx(25 - direct.i2)


def test_unimodality_on_random_draws():
    rng = np.random.default_rng(12)
    for _ in range(100):
        a, b = rng.uniform(0.2, 4.0, 2)
        N = int(rng.integers(2, 60))
        p1 = rng.uniform(0.0, min(3.0, a * (N - 1)))
        p2 = rng.uniform(0.0, min(3.0, b * (N - 1)))
        assert ratio_monotone_regime(a, b, p1, p2, N)
        assert gap_report(a, b, p1, p2, N).unimodal


def test_unimodality_can_fail_outside_regime():
    # frozen counterexample: a(N-1) < p1, ratios (0.738, 0.974) increase
    a, b = 1.3158168991994055, 1.490280982415093
    p1, p2 = 2.7223009842085535, 1.0719143520725969
    assert not ratio_monotone_regime(a, b, p1, p2, 2)
    assert not gap_report(a, b, p1, p2, 2).unimodal
    pi = bd_invariant(bd_marginal(a, b, p1, p2, 2))
    assert pi[0] > pi[1] > pi[2]  # pi itself is still single-peaked here


def test_hardy_bound_certified_by_eigensolve():
    for N in range(2, 61):
        rep = gap_report(1, 2, 3, 0, N)
        exact = bd_gap_exact(bd_marginal(1, 2, 3, 0, N))
        assert 0.0 < rep.gap_lower_bound <= exact + 1e-9


def test_hardy_bound_uniformly_positive():
    bounds = [gap_report(1, 2, 3, 0, N).gap_lower_bound for N in range(2, 201)]
    assert min(bounds) >= 0.01


def test_gap_report_json():
    payload = json.loads(gap_report(1, 2, 3, 0, 10).to_json())
    assert set(payload) == {"i_star", "B_plus", "B_minus", "gap_lower_bound", "i1", "i2", "unimodal"}


def test_lambda_u_symmetric_hand_case():
    ch = bd_marginal(1, 1, 1, 1, 2)
    assert lambda_u(ch, np.ones(2)) == pytest.approx(2.0)
    assert bd_gap_exact(ch) == pytest.approx(2.0, abs=1e-10)


def test_lambda_u_is_a_lower_bound():
    rng = np.random.default_rng(17)
    for _ in range(6):
        ch = bd_marginal(*rng.uniform(0.3, 2.5, 2), *rng.uniform(0.0, 2.0, 2), 10)
        exact = bd_gap_exact(ch)
        for _ in range(50):
            u = rng.uniform(0.1, 2.0, 10)
            assert lambda_u(ch, u) <= exact + 1e-9


def test_lambda_u_achieves_gap_via_grid_search():
    ch = bd_marginal(1, 1, 1, 1, 2)
    exact = bd_gap_exact(ch)
    best = max(
        lambda_u(ch, np.array([1.0, w])) for w in np.linspace(0.5, 1.5, 201)
    )
    assert best == pytest.approx(exact, abs=1e-9)


def test_lambda_u_validation():
    ch = bd_marginal(1, 1, 1, 1, 4)
    with pytest.raises(ValueError):
        lambda_u(ch, np.array([1.0, -1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        lambda_u(ch, np.ones(3))


def test_bd_gap_exact_hand_cases():
    # symmetric N=2 chain: spectrum of -G is {0, 2, 6}
    ch = bd_marginal(1, 1, 1, 1, 2)
    vals = spectrum(birth_death_generator(ch), reversible=True)
    np.testing.assert_allclose(vals, [-6.0, -2.0, 0.0], atol=1e-10)
    # complete-graph K=2, N=2, p=1 marginal: gap 1, spectrum {0, 1, 4}
    ch = bd_marginal(0.5, 0.5, 1, 1, 2)
    assert bd_gap_exact(ch) == pytest.approx(1.0, abs=1e-10)
    vals = spectrum(birth_death_generator(ch), reversible=True)
    np.testing.assert_allclose(vals, [-4.0, -1.0, 0.0], atol=1e-10)


def test_bd_gap_guard():
    with pytest.raises(ValueError, match="too large"):
        bd_gap_exact(bd_marginal(1, 2, 3, 1, 6000))


def test_gap_exceeds_rho_when_positive():
    rng = np.random.default_rng(23)
    for _ in range(15):
        a, b = rng.uniform(0.3, 2.5, 2)
        p1, p2 = rng.uniform(0.0, 2.0, 2)
        rho = a + b - abs(p1 - p2)
        if rho <= 0 or p1 + p2 == 0:
            continue
        N = int(rng.integers(2, 40))
        assert bd_gap_exact(bd_marginal(a, b, p1, p2, N)) >= rho - 1e-9
