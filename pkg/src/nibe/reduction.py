"""Executable security reduction from DBDH to IND-ID-CPA.

The simulator embeds a DBDH instance ``(g, g^a, g^b, g^c, z)`` into the public
parameters through a trapdoor ``(k, x', x, y', y)``. It answers key queries
whose ``F(v)`` is nonzero mod ``m``, embeds ``z`` in the challenge when
``F(v*) = 0``, and finally aborts artificially so that its overall survival
probability no longer depends on which identities the adversary picked.

Aborts are signalled with :class:`SimulationAbort`; the game drivers turn them
into a fair coin for the DBDH guess.
"""

from __future__ import annotations

import abc
import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from . import abort_analysis
from .abort_analysis import lambda_bound
from .bilinear import BilinearGroup
from .errors import ProtocolViolation
from .ibe import (
    Ciphertext,
    EncodedIdentity,
    MasterSecret,
    PrivateKey,
    PublicParams,
    SchemeConfig,
    encrypt,
    hash_product,
    keygen,
    precompute_pair,
)

ETA_CONSTANT = 8
ETA_SAMPLE_CAP = 10**6


class AbortKind(enum.Enum):
    NONE = "none"
    KEY_QUERY = "key-query"
    CHALLENGE = "challenge"
    ARTIFICIAL = "artificial"


class SimulationAbort(Exception):
    def __init__(self, kind: AbortKind):
        super().__init__(kind.value)
        self.kind = kind


@dataclass(frozen=True)
class DbdhTuple:
    g: object
    A: object
    B: object
    C: object
    z: object
    beta: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None
    c: Optional[int] = None


def gen_dbdh(group: BilinearGroup, beta: int, rng, *, oracle: bool = False) -> DbdhTuple:
    """A DBDH instance: ``z = e(g,g)^(abc)`` when ``beta == 1``, uniform otherwise."""
    a, b, c = (group.random_scalar(rng) for _ in range(3))
    g = group.generator()
    if beta:
        z = group.exp_target(group.pair_generator(), a * b % group.p * c)
    else:
        z = group.random_target(rng)
    A, B, C = group.exp(g, a), group.exp(g, b), group.exp(g, c)
    if oracle:
        return DbdhTuple(g, A, B, C, z, beta, a, b, c)
    return DbdhTuple(g, A, B, C, z)


@dataclass(frozen=True)
class TrapdoorState:
    q: int
    m: int
    k: int
    x_prime: int
    x: tuple
    y_prime: int
    y: tuple
    p: int

    def __post_init__(self):
        if self.m != 2 * self.q:
            raise ValueError("m must equal 2q")
        if any(not 0 <= xi < self.m for xi in (self.x_prime, *self.x)):
            raise ValueError("x entries must lie in [0, m)")


def check_reduction_config(config: SchemeConfig, q: int, group: BilinearGroup):
    """The order must exceed ``m * 2**ell * n`` so that ``F(v) = 0 mod p`` forces ``F(v) = 0``."""
    bound = 2 * q * (1 << config.ell) * config.n
    if group.p <= bound:
        raise ValueError(f"group order {group.p} must exceed m*2^ell*n = {bound}")


def sim_setup(tup: DbdhTuple, q: int, config: SchemeConfig, group: BilinearGroup, rng, *, y_base: str = "g"):
    """Trapdoored public parameters with ``g1 = A`` and ``g2 = B``.

    ``y_base="g1"`` reproduces the variant that raises ``g1`` (not ``g``) to
    the y-values; it breaks ``H(v) = g2^F(v) g^J(v)`` and exists only so tests
    can show that.
    """
    check_reduction_config(config, q, group)
    m = 2 * q
    p = group.p
    k = rng.randrange((1 << config.ell) * config.n)
    x_prime = rng.randrange(m)
    x = tuple(rng.randrange(m) for _ in range(config.n))
    y_prime = group.random_scalar(rng)
    y = tuple(group.random_scalar(rng) for _ in range(config.n))
    state = TrapdoorState(q, m, k, x_prime, x, y_prime, y, p)

    base = {"g": tup.g, "g1": tup.A}[y_base]
    g2 = tup.B
    u_prime = group.mul(group.exp(g2, (x_prime - k * m) % p), group.exp(base, y_prime))
    u = tuple(group.mul(group.exp(g2, xi), group.exp(base, yi)) for xi, yi in zip(x, y))
    params = PublicParams(config, group, tup.g, tup.A, g2, u_prime, u)
    return precompute_pair(params), state


def F(state: TrapdoorState, v: EncodedIdentity) -> int:
    """``x' + sum(v_i x_i) - m k`` as an exact integer."""
    return state.x_prime + sum(b * x for b, x in zip(v.v, state.x)) - state.m * state.k


def J(state: TrapdoorState, v: EncodedIdentity) -> int:
    return (state.y_prime + sum(b * y for b, y in zip(v.v, state.y))) % state.p


def sim_keygen(state: TrapdoorState, params: PublicParams, tup: DbdhTuple, v: EncodedIdentity, rng, *, r=None) -> PrivateKey:
    """Answer a key query without knowing ``a``, or raise ``SimulationAbort``."""
    f = F(state, v)
    if f % state.m == 0:
        raise SimulationAbort(AbortKind.KEY_QUERY)
    group = params.group
    p = group.p
    if r is None:
        r = group.random_scalar(rng)
    f_inv = pow(f % p, -1, p)
    h = hash_product(params, v)
    d1 = group.mul(group.exp(tup.A, -J(state, v) * f_inv % p), group.exp(h, r))
    d2 = group.mul(group.exp(tup.A, -f_inv % p), group.exp(params.g, r))
    return PrivateKey(d1, d2, v)


def sim_challenge(state: TrapdoorState, params: PublicParams, tup: DbdhTuple, v_star: EncodedIdentity, m0, m1, gamma: int) -> Ciphertext:
    """``(z * m_gamma, C, C^J(v*))``, or raise ``SimulationAbort`` when ``F(v*) != 0 mod p``."""
    if F(state, v_star) % state.p != 0:
        raise SimulationAbort(AbortKind.CHALLENGE)
    group = params.group
    m = m1 if gamma else m0
    return Ciphertext(group.mul_target(tup.z, m), tup.C, group.exp(tup.C, J(state, v_star)))


def eta_sample_count(eps: float, lam: float, *, constant: float = ETA_CONSTANT, cap: Optional[int] = ETA_SAMPLE_CAP) -> int:
    """``ceil(C eps^-2 ln(1/eps) lam^-1 ln(1/lam))``, clipped to ``[1, cap]``."""
    eps, lam = float(eps), float(lam)
    if not (0 < eps < 1 and 0 < lam < 1):
        raise ValueError("eps and lam must lie in (0, 1)")
    count = math.ceil(constant * math.log(1 / eps) / eps**2 * math.log(1 / lam) / lam)
    count = max(count, 1)
    return min(count, cap) if cap else count


def estimate_eta(queries, v_star, q: int, config: SchemeConfig, samples: int, rng) -> float:
    """Monte Carlo estimate of ``Pr_{X,k}[tau = 0]`` for fixed identities."""
    gen = abort_analysis._numpy_gen(rng)
    m = 2 * q
    X = abort_analysis.sample_x(gen, samples, m, config.n)
    k = gen.integers(0, abort_analysis.k_range(config.ell, config.n), size=samples)
    taus = abort_analysis.tau_batch(X, k, [tuple(getattr(v, "v", v)) for v in queries], tuple(getattr(v_star, "v", v_star)), m)
    return float(samples - int(taus.sum())) / samples


def artificial_abort(eta_prime: float, lam, rng) -> bool:
    """Abort with probability ``1 - lam/eta'`` when ``eta' > lam``; never otherwise."""
    if not 0 <= eta_prime <= 1:
        raise ValueError("eta_prime must be a probability")
    lam = float(lam)
    if eta_prime <= lam:
        return False
    return rng.random() >= lam / eta_prime


_LOSS_GRID = 2**40


def security_loss_bits(q: int, ell: int, n: int) -> float:
    """``log2(q * 2**(ell+4) * n)``.

    The ``log2(q n)`` term is rounded to a multiple of ``2**-40`` so the sum
    stays exact in a double; differences across ``ell`` are then exact integers.
    """
    if min(q, ell, n) < 1:
        raise ValueError("q, ell and n must be positive")
    qn = q * n
    whole = qn.bit_length() - 1
    frac = round(math.log2(qn / (1 << whole)) * _LOSS_GRID) / _LOSS_GRID
    return float(ell + 4 + whole) + frac


# --------------------------------------------------------------------------
# adversaries and games


class Adversary(abc.ABC):
    """Two-callback IND-ID-CPA adversary.

    ``extract(v)`` returns a private key for ``v``; it may be called in both
    phases. Exceptions raised by ``extract`` must propagate.
    """

    @abc.abstractmethod
    def choose_challenge(self, params: PublicParams, extract):
        """Phase 1. Return ``(m0, m1, v_star)``."""

    @abc.abstractmethod
    def guess(self, ciphertext: Ciphertext, extract) -> int:
        """Phase 2. Return the guess for the challenge bit."""


class RandomGuessAdversary(Adversary):
    def __init__(self, rng, v_star: EncodedIdentity, queries=()):
        self.rng = rng
        self.v_star = v_star
        self.queries = list(queries)

    def choose_challenge(self, params, extract):
        for v in self.queries:
            extract(v)
        group = params.group
        return group.random_target(self.rng), group.random_target(self.rng), self.v_star

    def guess(self, ciphertext, extract):
        return self.rng.getrandbits(1)


class ToyDlogAdversary(Adversary):
    """Breaks the scheme outright on the toy backend by reading ``t`` off ``c2``."""

    def __init__(self, rng, v_star: EncodedIdentity, queries=(), phase2_queries=()):
        self.rng = rng
        self.v_star = v_star
        self.queries = list(queries)
        self.phase2_queries = list(phase2_queries)

    def choose_challenge(self, params, extract):
        for v in self.queries:
            extract(v)
        group = params.group
        self.params = params
        self.m0 = group.random_target(self.rng)
        self.m1 = group.random_target(self.rng)
        while self.m1 == self.m0:
            self.m1 = group.random_target(self.rng)
        return self.m0, self.m1, self.v_star

    def guess(self, ciphertext, extract):
        for v in self.phase2_queries:
            extract(v)
        params = self.params
        group = params.group
        t = group.toy_dlog(ciphertext.c2)
        mask = group.exp_target(group.pair(params.g1, params.g2), t)
        m = group.mul_target(ciphertext.c1, group.inv_target(mask))
        if m == self.m0:
            return 0
        if m == self.m1:
            return 1
        return self.rng.getrandbits(1)


class _KeyOracle:
    def __init__(self, q, answer):
        self.q = q
        self.answer = answer
        self.queries = []
        self.forbidden = None

    def __call__(self, v):
        if len(self.queries) >= self.q:
            raise ProtocolViolation(f"more than q={self.q} key queries")
        if self.forbidden is not None and v == self.forbidden:
            raise ProtocolViolation("key query for the challenge identity")
        self.queries.append(v)
        return self.answer(v)

    def lock(self, v_star):
        if v_star in self.queries:
            raise ProtocolViolation("challenge identity was already queried")
        self.forbidden = v_star


def _check_challenge(params, v_star):
    if not isinstance(v_star, EncodedIdentity):
        raise ProtocolViolation("challenge identity must be an EncodedIdentity")
    if len(v_star) != params.config.n or v_star.ell != params.config.ell:
        raise ProtocolViolation("challenge identity does not match the scheme configuration")


@dataclass
class GameTranscript:
    queries: list = field(default_factory=list)
    challenge_identity: Optional[EncodedIdentity] = None
    gamma: Optional[int] = None
    gamma_guess: Optional[int] = None
    aborted: bool = False
    abort_kind: AbortKind = AbortKind.NONE
    beta: Optional[int] = None
    beta_guess: Optional[int] = None
    eta_prime: Optional[float] = None
    seed: Optional[int] = None

    def to_record(self) -> str:
        def b(x):
            return "-" if x is None else str(x)

        return (
            f"seed={b(self.seed)} abort_kind={self.abort_kind.value} gamma={b(self.gamma)} "
            f"gamma_guess={b(self.gamma_guess)} beta={b(self.beta)} beta_guess={b(self.beta_guess)}"
        )


def export_transcripts(transcripts, fp):
    """One line per game: ``seed abort_kind gamma gamma_guess beta beta_guess``."""
    for t in transcripts:
        fp.write(t.to_record() + "\n")


def run_reduction(adversary: Adversary, group: BilinearGroup, config: SchemeConfig, q: int, rng, *,
                  beta: Optional[int] = None, eps: float = 0.5, eta_samples: Optional[int] = None):
    """Play one DBDH game through the simulator. Returns ``(beta_guess, transcript)``."""
    if beta is None:
        beta = rng.getrandbits(1)
    tup = gen_dbdh(group, beta, rng)
    params, state = sim_setup(tup, q, config, group, rng)
    lam = lambda_bound(q, config.ell, config.n)
    tr = GameTranscript(beta=beta)
    oracle = _KeyOracle(q, lambda v: sim_keygen(state, params, tup, v, rng))
    tr.queries = oracle.queries
    try:
        m0, m1, v_star = adversary.choose_challenge(params, oracle)
        _check_challenge(params, v_star)
        oracle.lock(v_star)
        tr.challenge_identity = v_star
        tr.gamma = rng.getrandbits(1)
        ct = sim_challenge(state, params, tup, v_star, m0, m1, tr.gamma)
        tr.gamma_guess = adversary.guess(ct, oracle)
        samples = eta_samples or eta_sample_count(eps, lam)
        tr.eta_prime = estimate_eta(oracle.queries, v_star, q, config, samples, rng)
        if artificial_abort(tr.eta_prime, lam, rng):
            raise SimulationAbort(AbortKind.ARTIFICIAL)
        tr.beta_guess = int(tr.gamma_guess == tr.gamma)
    except SimulationAbort as exc:
        tr.aborted = True
        tr.abort_kind = exc.kind
        tr.beta_guess = rng.getrandbits(1)
    return tr.beta_guess, tr


@dataclass(frozen=True)
class GameStats:
    wins: int
    trials: int

    @property
    def rate(self) -> float:
        return self.wins / self.trials

    @property
    def advantage(self) -> float:
        return abs(self.rate - 0.5)

    @property
    def sigma(self) -> float:
        """Standard error of ``rate`` under a fair coin."""
        return math.sqrt(0.25 / self.trials)


def run_ind_id_cpa_game(params: PublicParams, master: MasterSecret, adversary: Adversary, trials: int, rng, *, q: Optional[int] = None) -> GameStats:
    """Empirical ``|Pr[b' = b] - 1/2|`` against the real scheme."""
    wins = 0
    q = q if q is not None else 2**31
    for _ in range(trials):
        oracle = _KeyOracle(q, lambda v: keygen(params, master, v, rng))
        m0, m1, v_star = adversary.choose_challenge(params, oracle)
        _check_challenge(params, v_star)
        oracle.lock(v_star)
        b = rng.getrandbits(1)
        ct = encrypt(params, v_star, m1 if b else m0, rng)
        wins += int(adversary.guess(ct, oracle) == b)
    return GameStats(wins, trials)
