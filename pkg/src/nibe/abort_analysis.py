"""Abort-probability analysis for the reduction's trapdoor choice.

The simulator draws ``X = (x', x_1..x_n)`` uniformly from ``[0, m)`` and ``k``
uniformly from ``[0, 2**ell * n)``. For an identity ``v`` let
``S(v) = x' + sum(v_i * x_i)`` and ``F(v) = S(v) - m*k``. The simulator survives
a game with key queries ``v^1..v^q`` and challenge ``v*`` iff

    tau = 0  <=>  F(v*) == 0 over the integers  and  S(v^j) != 0 (mod m) for all j

``tau_prime`` replaces the first clause with ``S(v*) == 0 (mod m)``.

Everything here works in two modes: exact enumeration when the state space
``m**(n+1) * 2**ell * n`` is at most :data:`EXACT_LIMIT`, Monte Carlo otherwise.
Exact results are ``fractions.Fraction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleEnumeration

EXACT_LIMIT = 10**7
_CHUNK = 1 << 16


def _blocks(v) -> tuple:
    return tuple(getattr(v, "v", v))


def lambda_bound(q: int, ell: int, n: int) -> Fraction:
    """Lower bound ``1 / (4 q 2**ell n)`` on the natural non-abort probability."""
    if min(q, ell, n) < 1:
        raise ValueError("q, ell and n must be positive")
    return Fraction(1, 4 * q * (1 << ell) * n)


def k_range(ell: int, n: int) -> int:
    return (1 << ell) * n


def weighted_sum(x_prime: int, x_vec: Sequence[int], v) -> int:
    """``x' + sum(v_i x_i)``: the k-free part of F."""
    return x_prime + sum(b * x for b, x in zip(_blocks(v), x_vec))


def tau(x_prime, x_vec, queries, v_star, k, m) -> int:
    if weighted_sum(x_prime, x_vec, v_star) - m * k != 0:
        return 1
    if any(weighted_sum(x_prime, x_vec, vj) % m == 0 for vj in queries):
        return 1
    return 0


def tau_prime(x_prime, x_vec, queries, v_star, m) -> int:
    if weighted_sum(x_prime, x_vec, v_star) % m != 0:
        return 1
    if any(weighted_sum(x_prime, x_vec, vj) % m == 0 for vj in queries):
        return 1
    return 0


def k_uniqueness_check(x_prime, x_vec, v_star, m, ell, n) -> Optional[int]:
    """The unique ``k`` making ``F(v*) = 0`` over the integers, or None."""
    s = weighted_sum(x_prime, x_vec, v_star)
    if s % m:
        return None
    k = s // m
    if not 0 <= k < k_range(ell, n):
        # cannot happen for in-range inputs; the bound is what makes k unique
        raise AssertionError(f"k={k} escapes [0, {k_range(ell, n)})")
    return k


# --------------------------------------------------------------------------
# vectorised forms


def _coeff_matrix(identities, n) -> np.ndarray:
    """Rows ``(1, v_1..v_n)`` so that ``X @ rows.T`` gives every S(v)."""
    rows = [(1, *_blocks(v)) for v in identities]
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), n + 1)


def _answerable(X, queries, n, m) -> np.ndarray:
    if not len(queries):
        return np.ones(len(X), dtype=bool)
    S = X @ _coeff_matrix(queries, n).T
    return np.all(S % m != 0, axis=1)


def tau_batch(X: np.ndarray, k: np.ndarray, queries, v_star, m: int) -> np.ndarray:
    """Vectorised ``tau`` over rows of ``X`` (shape ``(s, n+1)``) and ``k`` (shape ``(s,)``)."""
    n = X.shape[1] - 1
    s_star = X @ _coeff_matrix([v_star], n)[0]
    ok = (s_star - m * k == 0) & _answerable(X, queries, n, m)
    return (~ok).astype(np.int8)


def tau_prime_batch(X: np.ndarray, queries, v_star, m: int) -> np.ndarray:
    n = X.shape[1] - 1
    s_star = X @ _coeff_matrix([v_star], n)[0]
    ok = (s_star % m == 0) & _answerable(X, queries, n, m)
    return (~ok).astype(np.int8)


def sample_x(gen: np.random.Generator, samples: int, m: int, n: int) -> np.ndarray:
    return gen.integers(0, m, size=(samples, n + 1), dtype=np.int64)


def iter_x(m: int, n: int, chunk: int = _CHUNK):
    """Yield every X in ``[0, m)**(n+1)`` as row blocks, lexicographic in ``(x', x_1, ..)``."""
    total = m ** (n + 1)
    powers = m ** np.arange(n, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % m


def state_space(m: int, ell: int, n: int) -> int:
    return m ** (n + 1) * k_range(ell, n)


def exact_feasible(m: int, ell: int, n: int) -> bool:
    return state_space(m, ell, n) <= EXACT_LIMIT


def _require_feasible(size: int):
    if size > EXACT_LIMIT:
        raise InfeasibleEnumeration(f"enumeration needs {size} points, limit is {EXACT_LIMIT}")


def exact_non_abort(queries, v_star, m: int, ell: int, n: int) -> Fraction:
    """``Pr_{X,k}[tau = 0]`` by enumerating every ``(X, k)`` explicitly."""
    K = k_range(ell, n)
    _require_feasible(state_space(m, ell, n))
    ks = np.arange(K, dtype=np.int64)
    hits = 0
    for X in iter_x(m, n):
        s_star = X @ _coeff_matrix([v_star], n)[0]
        zero_f = (s_star[:, None] - m * ks[None, :]) == 0
        hits += int(np.count_nonzero(zero_f & _answerable(X, queries, n, m)[:, None]))
    return Fraction(hits, m ** (n + 1) * K)


def exact_tau_prime_zero(queries, v_star, m: int, n: int) -> Fraction:
    """``Pr_X[tau' = 0]`` by enumerating X only."""
    _require_feasible(m ** (n + 1))
    hits = sum(int(np.count_nonzero(tau_prime_batch(X, queries, v_star, m) == 0)) for X in iter_x(m, n))
    return Fraction(hits, m ** (n + 1))


@dataclass(frozen=True)
class KFactorResult:
    """Both sides of ``Pr[tau=0] = Pr[tau'=0] / (2**ell n)``."""

    lhs: object
    rhs: object
    k_range: int
    exact: bool
    sigma: float = 0.0

    @property
    def scaled_rhs(self):
        return self.rhs / self.k_range


def relation_8_check(queries, v_star, q, ell, n, trials=10**5, rng=None, *, m=None, exact=None) -> KFactorResult:
    """Estimate or compute ``Pr_{X,k}[tau=0]`` and ``Pr_X[tau'=0]`` independently."""
    m = m or 2 * q
    K = k_range(ell, n)
    if exact is None:
        exact = exact_feasible(m, ell, n)
    if exact:
        return KFactorResult(
            exact_non_abort(queries, v_star, m, ell, n), exact_tau_prime_zero(queries, v_star, m, n), K, True
        )
    gen = _numpy_gen(rng)
    X = sample_x(gen, trials, m, n)
    k = gen.integers(0, K, size=trials)
    lhs = float(np.mean(tau_batch(X, k, queries, v_star, m) == 0))
    # fresh X for the right side so the two estimates are independent
    X2 = sample_x(gen, trials, m, n)
    rhs = float(np.mean(tau_prime_batch(X2, queries, v_star, m) == 0))
    sig_l = math.sqrt(max(lhs * (1 - lhs), 1e-300) / trials)
    sig_r = math.sqrt(max(rhs * (1 - rhs), 1e-300) / trials) / K
    return KFactorResult(lhs, rhs, K, False, math.hypot(sig_l, sig_r))


def _numpy_gen(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return np.random.default_rng(rng.getrandbits(64))


# --------------------------------------------------------------------------
# pairwise independence of S(v) mod m


def lemma1_exact(v, v_prime, a: int, a_prime: int, m: int, n: int) -> Fraction:
    """``Pr_X[S(v) = a and S(v') = a' (mod m)]`` by enumerating all ``m**(n+1)`` X."""
    v, v_prime = _blocks(v), _blocks(v_prime)
    if v == v_prime:
        raise ValueError("the pairwise law needs distinct identities")
    if len(v) != n or len(v_prime) != n:
        raise ValueError("identity length does not match n")
    _require_feasible(m ** (n + 1))
    C = _coeff_matrix([v, v_prime], n)
    hits = 0
    for X in iter_x(m, n):
        S = (X @ C.T) % m
        hits += int(np.count_nonzero((S[:, 0] == a % m) & (S[:, 1] == a_prime % m)))
    return Fraction(hits, m ** (n + 1))


def differences_coprime(v, v_prime, m: int) -> bool:
    """True when the block differences generate Z_m, i.e. ``gcd(d_1..d_n, m) == 1``.

    This is exactly when the pair is uniform on ``Z_m x Z_m``. For prime-power
    ``m`` it is the same as "some difference is coprime to m".
    """
    d = [a - b for a, b in zip(_blocks(v), _blocks(v_prime))]
    return math.gcd(m, *d) == 1


@dataclass(frozen=True)
class PairLawRow:
    v: tuple
    v_prime: tuple
    coprime: bool
    probabilities: dict  # (a, a') -> Fraction

    @property
    def uniform(self) -> bool:
        target = Fraction(1, len(self.probabilities))
        return all(p == target for p in self.probabilities.values())


def pairwise_survey(m: int, n: int, block_bound: Optional[int] = None) -> list:
    """Every distinct identity pair with blocks in ``[0, block_bound)`` and its joint law.

    ``block_bound`` defaults to ``m``; residues are all that matter.
    """
    block_bound = block_bound or m
    _require_feasible(m ** (n + 1) * block_bound ** (2 * n))
    rows = []
    idents = list(product(range(block_bound), repeat=n))
    for v in idents:
        for vp in idents:
            if v == vp:
                continue
            C = _coeff_matrix([v, vp], n)
            counts = np.zeros((m, m), dtype=np.int64)
            for X in iter_x(m, n):
                S = (X @ C.T) % m
                np.add.at(counts, (S[:, 0], S[:, 1]), 1)
            total = m ** (n + 1)
            probs = {(a, b): Fraction(int(counts[a, b]), total) for a in range(m) for b in range(m)}
            rows.append(PairLawRow(v, vp, differences_coprime(v, vp, m), probs))
    return rows


def prob_b_prime(v_star, m: int, n: int) -> Fraction:
    """``Pr_X[S(v*) = 0 (mod m)]``, exact."""
    _require_feasible(m ** (n + 1))
    c = _coeff_matrix([v_star], n)[0]
    hits = sum(int(np.count_nonzero((X @ c) % m == 0)) for X in iter_x(m, n))
    return Fraction(hits, m ** (n + 1))


# --------------------------------------------------------------------------
# the end-to-end bound


@dataclass
class AbortExperiment:
    q: int
    ell: int
    n: int
    queries: list
    v_star: tuple
    trials: int = 10**5
    m: Optional[int] = None

    def __post_init__(self):
        if self.m is None:
            self.m = 2 * self.q
        self.queries = [_blocks(v) for v in self.queries]
        self.v_star = _blocks(self.v_star)
        if len(self.queries) > self.q:
            raise ValueError(f"{len(self.queries)} queries exceed q={self.q}")
        bound = 1 << self.ell
        for v in [*self.queries, self.v_star]:
            if len(v) != self.n or any(not 0 <= b < bound for b in v):
                raise ValueError(f"identity {v} invalid for n={self.n}, ell={self.ell}")
        if self.v_star in self.queries:
            raise ValueError("challenge identity appears among the key queries")


def random_experiment(q: int, ell: int, n: int, rng, trials: int = 10**5) -> AbortExperiment:
    """q distinct query identities plus a distinct challenge, uniformly at random."""
    space = (1 << ell) ** n
    count = min(q + 1, space)
    picks = rng.sample(range(space), count)
    idents = [tuple((x >> (ell * (n - 1 - i))) & ((1 << ell) - 1) for i in range(n)) for x in picks]
    return AbortExperiment(q, ell, n, idents[1:], idents[0], trials)


@dataclass
class BoundReport:
    q: int
    ell: int
    n: int
    m: int
    estimate: object
    lam: Fraction
    sigma: float
    exact: bool
    trials: int
    conditional_miss_rates: list = field(default_factory=list)
    prob_b_prime: object = None
    prob_all_answerable_given_b: object = None

    @property
    def passed(self) -> bool:
        return float(self.estimate) >= float(self.lam) - 3 * self.sigma

    @property
    def rates_above_one_over_m(self) -> list:
        """Indices j where ``Pr[not A_j | B']`` exceeds ``1/m``."""
        return [j for j, r in enumerate(self.conditional_miss_rates) if r is not None and float(r) > 1 / self.m + 3 * self._rate_sigma]

    @property
    def _rate_sigma(self) -> float:
        if self.exact or self.prob_b_prime is None:
            return 0.0
        eff = max(float(self.prob_b_prime) * self.trials, 1.0)
        return math.sqrt(0.25 / eff)

    @property
    def union_bound_holds(self) -> bool:
        if self.prob_all_answerable_given_b is None:
            return True
        rhs = 1 - sum(float(r) for r in self.conditional_miss_rates if r is not None)
        slack = 0.0 if self.exact else 3 * self._rate_sigma * max(1, len(self.conditional_miss_rates))
        return float(self.prob_all_answerable_given_b) >= rhs - slack

    def to_text(self) -> str:
        lines = [
            f"q={self.q}",
            f"ell={self.ell}",
            f"n={self.n}",
            f"m={self.m}",
            f"lambda={self.lam}",
            f"estimate={_fmt(self.estimate)}",
            f"sigma={self.sigma:.6g}",
            f"exact={str(self.exact).lower()}",
            f"trials={self.trials}",
            f"prob_b_prime={_fmt(self.prob_b_prime)}",
            f"prob_all_answerable_given_b_prime={_fmt(self.prob_all_answerable_given_b)}",
        ]
        for j, r in enumerate(self.conditional_miss_rates):
            lines.append(f"miss_rate_given_b_prime[{j}]={_fmt(r)}")
        lines.append("rates_above_one_over_m=" + ",".join(map(str, self.rates_above_one_over_m)))
        lines.append(f"union_bound_holds={str(self.union_bound_holds).lower()}")
        lines.append(f"pass={str(self.passed).lower()}")
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, Fraction):
        return str(x)
    return f"{float(x):.6g}"


def bound_check(experiment: AbortExperiment, rng=None, *, exact: Optional[bool] = None) -> BoundReport:
    """Compare ``Pr_{X,k}[tau = 0]`` with the lambda bound and collect diagnostics.

    In Monte Carlo mode ``sigma`` is the binomial standard error at ``lambda``
    (the null value), so the pass criterion ``estimate >= lambda - 3 sigma`` is a
    one-sided 3-sigma test.
    """
    e = experiment
    m, n, K = e.m, e.n, k_range(e.ell, e.n)
    lam = lambda_bound(e.q, e.ell, e.n)
    if exact is None:
        exact = exact_feasible(m, e.ell, n)

    if exact:
        estimate = exact_non_abort(e.queries, e.v_star, m, e.ell, n)
        b_count, miss_counts, all_ok = 0, [0] * len(e.queries), 0
        for X in iter_x(m, n):
            b, misses = _b_prime_and_misses(X, e, n, m)
            b_count += int(b.sum())
            all_ok += int(np.count_nonzero(b & ~misses.any(axis=1))) if misses.size else int(b.sum())
            for j in range(len(e.queries)):
                miss_counts[j] += int(np.count_nonzero(b & misses[:, j]))
        total = m ** (n + 1)
        pb = Fraction(b_count, total)
        rates = [Fraction(c, b_count) if b_count else None for c in miss_counts]
        cond = Fraction(all_ok, b_count) if b_count else None
        return BoundReport(e.q, e.ell, n, m, estimate, lam, 0.0, True, total * K, rates, pb, cond)

    gen = _numpy_gen(rng)
    X = sample_x(gen, e.trials, m, n)
    k = gen.integers(0, K, size=e.trials)
    estimate = float(np.mean(tau_batch(X, k, e.queries, e.v_star, m) == 0))
    sigma = math.sqrt(float(lam) * (1 - float(lam)) / e.trials)
    b, misses = _b_prime_and_misses(X, e, n, m)
    nb = int(b.sum())
    rates = [float(np.count_nonzero(b & misses[:, j])) / nb if nb else None for j in range(len(e.queries))]
    if nb:
        ok = b & ~misses.any(axis=1) if misses.size else b
        cond = float(np.count_nonzero(ok)) / nb
    else:
        cond = None
    return BoundReport(e.q, e.ell, n, m, estimate, lam, sigma, False, e.trials, rates, nb / e.trials, cond)


def _b_prime_and_misses(X, e: AbortExperiment, n: int, m: int):
    b = (X @ _coeff_matrix([e.v_star], n)[0]) % m == 0
    if e.queries:
        misses = (X @ _coeff_matrix(e.queries, n).T) % m == 0
    else:
        misses = np.zeros((len(X), 0), dtype=bool)
    return b, misses
