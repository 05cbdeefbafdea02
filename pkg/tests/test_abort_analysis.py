import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nibe.abort_analysis import (
    AbortExperiment,
    bound_check,
    differences_coprime,
    exact_non_abort,
    exact_tau_prime_zero,
    iter_x,
    k_uniqueness_check,
    lambda_bound,
    lemma1_exact,
    pairwise_survey,
    prob_b_prime,
    random_experiment,
    relation_8_check,
    tau,
    tau_batch,
    tau_prime,
    tau_prime_batch,
)
from nibe.errors import InfeasibleEnumeration


def _S(X, v):
    return X[0] + sum(a * b for a, b in zip(v, X[1:]))


def _oracle(queries, v_star, m, ell, n):
    """Pure-Python enumeration returning ``(Pr[tau=0], Pr[tau'=0])``."""
    K = (1 << ell) * n
    t0 = tp0 = 0
    for X in product(range(m), repeat=n + 1):
        if any(_S(X, v) % m == 0 for v in queries):
            continue
        s = _S(X, v_star)
        if s % m == 0:
            tp0 += 1
        t0 += sum(1 for k in range(K) if s == m * k)
    total = m ** (n + 1)
    return Fraction(t0, total * K), Fraction(tp0, total)


def test_tau_examples():
    # m = 4, x' = 1, x = (3,), v* = (1,): S = 4, so k = 1 makes F zero
    assert tau(1, (3,), [], (1,), 1, 4) == 0
    assert tau(1, (3,), [], (1,), 0, 4) == 1
    assert tau(1, (3,), [(2,)], (1,), 1, 4) == 0  # S((2,)) = 7
    assert tau(1, (3,), [(1,)], (1,), 1, 4) == 1
    assert tau_prime(1, (3,), [], (1,), 4) == 0
    assert tau_prime(1, (3,), [], (2,), 4) == 1


def test_k_uniqueness():
    assert k_uniqueness_check(1, (3,), (1,), 4, 1, 1) == 1
    assert k_uniqueness_check(1, (3,), (2,), 4, 2, 1) is None
    m, ell, n = 4, 2, 2
    for X in product(range(m), repeat=n + 1):
        for v in product(range(1 << ell), repeat=n):
            k = k_uniqueness_check(X[0], X[1:], v, m, ell, n)
            ks = [k for k in range((1 << ell) * n) if _S(X, v) == m * k]
            assert ks == ([] if k is None else [k])


def test_tau_decomposition_exhaustive():
    """tau = 0 exactly when tau' = 0 and k hits the unique value."""
    for m, n, ell in product((2, 4), (1, 2), (1, 2)):
        idents = list(product(range(1 << ell), repeat=n))
        v_star, queries = idents[-1], idents[:1]
        for X in product(range(m), repeat=n + 1):
            k_star = k_uniqueness_check(X[0], X[1:], v_star, m, ell, n)
            for k in range((1 << ell) * n):
                t = tau(X[0], X[1:], queries, v_star, k, m)
                tp = tau_prime(X[0], X[1:], queries, v_star, m)
                assert (t == 0) == (tp == 0 and k == k_star)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 2),
    st.integers(1, 2),
    st.integers(1, 2),
    st.data(),
)
def test_k_factorisation_exact_matches_oracle(q, ell, n, data):
    m = 2 * q
    ident = st.tuples(*[st.integers(0, (1 << ell) - 1)] * n)
    v_star = data.draw(ident)
    queries = data.draw(st.lists(ident.filter(lambda v: v != v_star), max_size=q))
    r = relation_8_check(queries, v_star, q, ell, n)
    lhs, rhs = _oracle(queries, v_star, m, ell, n)
    assert r.exact
    assert r.lhs == lhs and r.rhs == rhs
    assert r.lhs == r.scaled_rhs


def test_k_factorisation_monte_carlo():
    rng = random.Random(3)
    queries, v_star = [(1, 2), (3, 3)], (2, 0)
    r = relation_8_check(queries, v_star, 2, 2, 2, trials=400_000, rng=rng, exact=False)
    assert not r.exact
    assert abs(r.lhs - r.scaled_rhs) <= 4 * r.sigma
    exact_l, _ = _oracle(queries, v_star, 4, 2, 2)
    assert abs(r.lhs - float(exact_l)) <= 4 * r.sigma


def test_batch_forms_agree_with_scalar():
    gen = np.random.default_rng(1)
    m, n = 6, 3
    X = gen.integers(0, m, size=(500, n + 1))
    k = gen.integers(0, 8 * n, size=500)
    queries, v_star = [(1, 2, 3), (0, 0, 5)], (7, 1, 4)
    tb = tau_batch(X, k, queries, v_star, m)
    tpb = tau_prime_batch(X, queries, v_star, m)
    for row, kk, t, tp in zip(X.tolist(), k.tolist(), tb, tpb):
        assert t == tau(row[0], row[1:], queries, v_star, kk, m)
        assert tp == tau_prime(row[0], row[1:], queries, v_star, m)


def test_iter_x_enumerates_everything_once():
    rows = np.concatenate(list(iter_x(3, 2, chunk=5)))
    assert rows.shape == (27, 3)
    assert sorted(map(tuple, rows.tolist())) == list(product(range(3), repeat=3))


def test_exact_enumeration_limits():
    with pytest.raises(InfeasibleEnumeration):
        exact_non_abort([], (1,) * 8, 64, 32, 8)
    with pytest.raises(InfeasibleEnumeration):
        exact_tau_prime_zero([], (1,) * 12, 64, 12)


# -- pairwise independence ------------------------------------------------


def test_pairwise_law_examples():
    # differences (1,) generate Z_4: uniform
    assert lemma1_exact((1,), (2,), 0, 0, 4, 1) == Fraction(1, 16)
    assert lemma1_exact((1, 0), (2, 2), 1, 2, 3, 2) == Fraction(1, 9)
    # difference 2 does not generate Z_4: mass piles onto half the pairs
    assert lemma1_exact((0,), (2,), 0, 0, 4, 1) == Fraction(1, 8)
    assert lemma1_exact((0,), (2,), 0, 1, 4, 1) == 0
    with pytest.raises(ValueError):
        lemma1_exact((1,), (1,), 0, 0, 4, 1)


def test_differences_coprime():
    assert differences_coprime((1,), (2,), 4)
    assert not differences_coprime((0,), (2,), 4)
    assert differences_coprime((0, 0), (2, 3), 6)  # gcd(2, 3, 6) = 1
    assert not differences_coprime((0, 0), (2, 4), 6)


def test_pairwise_survey_uniform_iff_coprime():
    for m, n in ((2, 1), (3, 2), (4, 1), (4, 2), (6, 1)):
        rows = pairwise_survey(m, n)
        assert rows
        for row in rows:
            assert row.uniform == row.coprime
            assert sum(row.probabilities.values()) == 1


def test_pairwise_survey_prime_modulus_always_uniform():
    rows = pairwise_survey(5, 1)
    assert all(r.uniform for r in rows)
    assert len(rows) == 5 * 4


def test_prob_b_prime():
    # for m prime every v* gives exactly 1/m (the x' term alone is uniform)
    for v in product(range(3), repeat=2):
        assert prob_b_prime(v, 3, 2) == Fraction(1, 3)
    assert prob_b_prime((1, 2), 4, 2) == Fraction(1, 4)
    assert prob_b_prime((0,), 4, 1) == Fraction(1, 4)


# -- end-to-end bound -----------------------------------------------------


def test_experiment_validation():
    with pytest.raises(ValueError):
        AbortExperiment(1, 1, 1, [(0,), (1,)], (1,))
    with pytest.raises(ValueError):
        AbortExperiment(2, 1, 1, [(1,)], (1,))
    with pytest.raises(ValueError):
        AbortExperiment(1, 1, 1, [(2,)], (1,))


def test_random_experiment_shape():
    rng = random.Random(4)
    for _ in range(50):
        e = random_experiment(3, 2, 2, rng)
        assert len(e.queries) == 3 and len(set(e.queries)) == 3
        assert e.v_star not in e.queries and e.m == 6


def test_bound_check_exact_single_bit():
    e = AbortExperiment(1, 1, 1, [(0,)], (1,))
    rep = bound_check(e)
    assert rep.exact
    assert rep.estimate == Fraction(1, 8) == rep.lam
    assert rep.passed
    assert rep.prob_b_prime == Fraction(1, 2)
    assert rep.union_bound_holds
    text = rep.to_text()
    assert "lambda=1/8" in text and "pass=true" in text


def test_bound_check_exposes_even_difference_failure():
    """An even block difference with m = 2 defeats the lambda bound outright."""
    e = AbortExperiment(1, 2, 1, [(0,)], (2,))
    rep = bound_check(e)
    assert rep.estimate == 0
    assert rep.lam == Fraction(1, 16)
    assert not rep.passed
    assert rep.conditional_miss_rates == [Fraction(1)]
    assert rep.rates_above_one_over_m == [0]
    assert not differences_coprime((0,), (2,), 2)


def test_bound_check_exact_matches_oracle():
    rng = random.Random(11)
    for q, ell, n in ((1, 1, 2), (2, 1, 2), (2, 2, 2), (3, 1, 2)):
        for _ in range(5):
            e = random_experiment(q, ell, n, rng)
            rep = bound_check(e, exact=True)
            assert rep.estimate == _oracle(e.queries, e.v_star, e.m, ell, n)[0]
            assert rep.union_bound_holds


def test_bound_check_monte_carlo_agrees_with_exact():
    rng = random.Random(12)
    e = AbortExperiment(2, 2, 2, [(1, 2), (3, 1)], (2, 3), trials=200_000)
    exact = bound_check(e, exact=True)
    mc = bound_check(e, rng, exact=False)
    sd = math.sqrt(float(exact.estimate) * (1 - float(exact.estimate)) / e.trials)
    assert abs(mc.estimate - float(exact.estimate)) <= 4 * sd
    assert mc.sigma == pytest.approx(math.sqrt(float(mc.lam) * (1 - float(mc.lam)) / e.trials))


def test_single_bit_blocks_always_meet_lambda():
    """With ell = 1 every nonzero difference is a unit, and the bound holds exactly."""
    for q, n in ((1, 1), (1, 2), (2, 2), (1, 3), (2, 3)):
        idents = list(product((0, 1), repeat=n))
        for v_star in idents:
            others = [v for v in idents if v != v_star]
            for queries in ([], others[:q], others[-q:]):
                e = AbortExperiment(q, 1, n, queries, v_star)
                assert bound_check(e).estimate >= lambda_bound(q, 1, n)


def test_prime_modulus_restores_pairwise_independence():
    """A prime m above 2**ell makes every difference a unit, unlike m = 2q."""
    ell, n = 2, 1
    for v, vp in product(product(range(1 << ell), repeat=n), repeat=2):
        if v != vp:
            assert differences_coprime(v, vp, 5)
    assert not differences_coprime((0,), (2,), 2)
