"""Identity-based encryption with a compressed public vector.

Identities are hashed to ``n * ell`` bits and cut into ``n`` blocks of ``ell``
bits. Each block is used as an exponent on its own public element, so the
public vector has ``n`` entries instead of ``n * ell``. With ``ell = 1`` the
construction is exactly Waters' scheme.

Messages live in the target group. Byte payloads go through the KEM-DEM
wrapper in :mod:`nibe.formats`.
"""

from __future__ import annotations

import enum
import hashlib
import secrets
from dataclasses import dataclass, field, replace
from typing import Optional

from .bilinear import BilinearGroup


class HashId(enum.IntEnum):
    SHA256 = 0x01
    SHA512 = 0x02

    @property
    def bits(self) -> int:
        return {HashId.SHA256: 256, HashId.SHA512: 512}[self]

    def digest(self, data: bytes) -> bytes:
        return hashlib.new(self.name.lower(), data).digest()


@dataclass(frozen=True)
class SchemeConfig:
    n: int
    ell: int
    hash_id: HashId = HashId.SHA256

    def __post_init__(self):
        if self.n < 1 or self.ell < 1:
            raise ValueError("n and ell must be positive")
        object.__setattr__(self, "hash_id", HashId(self.hash_id))
        if self.n_prime > self.hash_id.bits:
            raise ValueError(
                f"n*ell = {self.n_prime} exceeds the {self.hash_id.bits}-bit digest of {self.hash_id.name}"
            )

    @property
    def n_prime(self) -> int:
        return self.n * self.ell

    def check_group(self, group: BilinearGroup):
        # blocks are raw exponents < 2**ell; keep them far below the group order
        if self.ell >= group.p.bit_length() - 2:
            raise ValueError(f"ell={self.ell} too large for a {group.p.bit_length()}-bit group order")


LEGACY_PROFILE = SchemeConfig(n=5, ell=32)
PRODUCTION_PROFILE = SchemeConfig(n=8, ell=32)


@dataclass(frozen=True)
class EncodedIdentity:
    v: tuple
    ell: int

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(b) for b in self.v))
        bound = 1 << self.ell
        if any(not 0 <= b < bound for b in self.v):
            raise ValueError(f"identity block outside [0, 2**{self.ell})")

    def __len__(self):
        return len(self.v)

    def __iter__(self):
        return iter(self.v)


def encode_identity(id_bytes: bytes, config: SchemeConfig) -> EncodedIdentity:
    """Hash ``id_bytes`` and split the first ``n*ell`` digest bits into blocks.

    Blocks are read big-endian; ``v[0]`` holds the most significant bits.
    """
    return split_blocks(config.hash_id.digest(id_bytes), config)


def split_blocks(digest: bytes, config: SchemeConfig) -> EncodedIdentity:
    if 8 * len(digest) < config.n_prime:
        raise ValueError("digest shorter than n*ell bits")
    bits = int.from_bytes(digest, "big") >> (8 * len(digest) - config.n_prime)
    mask = (1 << config.ell) - 1
    blocks = [(bits >> (config.ell * (config.n - 1 - i))) & mask for i in range(config.n)]
    return EncodedIdentity(tuple(blocks), config.ell)


@dataclass(frozen=True)
class PublicParams:
    config: SchemeConfig
    group: BilinearGroup = field(repr=False)
    g: object
    g1: object
    g2: object
    u_prime: object
    u: tuple
    pair_g1_g2: Optional[object] = None

    def __post_init__(self):
        if len(self.u) != self.config.n:
            raise ValueError(f"public vector has {len(self.u)} entries, config says n={self.config.n}")

    def elements(self) -> tuple:
        """The logical group elements, in wire order ``g, g1, g2, u', u_1..u_n``."""
        return (self.g, self.g1, self.g2, self.u_prime, *self.u)

    @property
    def element_count(self) -> int:
        return len(self.elements())


@dataclass(frozen=True)
class MasterSecret:
    g2_alpha: object
    # kept only in test-oracle mode
    alpha: Optional[int] = None


@dataclass(frozen=True)
class PrivateKey:
    d1: object
    d2: object
    identity: EncodedIdentity


@dataclass(frozen=True)
class Ciphertext:
    c1: object
    c2: object
    c3: object


def setup(config: SchemeConfig, group: BilinearGroup, rng=None, *, oracle: bool = False):
    """Generate ``(PublicParams, MasterSecret)`` with the pairing cache filled.

    ``oracle=True`` keeps ``alpha`` in the master secret; only tests want that.
    """
    rng = rng or secrets.SystemRandom()
    config.check_group(group)
    g = group.generator()
    alpha = group.random_scalar(rng)
    g1 = group.exp(g, alpha)
    g2 = group.random_element(rng)
    u_prime = group.random_element(rng)
    u = tuple(group.random_element(rng) for _ in range(config.n))
    params = PublicParams(config, group, g, g1, g2, u_prime, u)
    master = MasterSecret(group.exp(g2, alpha), alpha if oracle else None)
    return precompute_pair(params), master


def precompute_pair(params: PublicParams) -> PublicParams:
    if params.pair_g1_g2 is not None:
        return params
    return replace(params, pair_g1_g2=params.group.pair(params.g1, params.g2))


def _check_identity(params: PublicParams, v: EncodedIdentity):
    if len(v) != params.config.n:
        raise ValueError(f"identity has {len(v)} blocks, expected {params.config.n}")
    if v.ell != params.config.ell:
        raise ValueError(f"identity encoded with ell={v.ell}, expected {params.config.ell}")


def hash_product(params: PublicParams, v: EncodedIdentity):
    """``u' * prod(u_i ** v_i)``."""
    _check_identity(params, v)
    group = params.group
    return group.multi_exp((params.u_prime, *params.u), (1, *v.v))


def keygen(params: PublicParams, master: MasterSecret, v: EncodedIdentity, rng=None, *, r=None) -> PrivateKey:
    group = params.group
    if r is None:
        r = group.random_scalar(rng or secrets.SystemRandom())
    h = hash_product(params, v)
    d1 = group.mul(master.g2_alpha, group.exp(h, r))
    d2 = group.exp(params.g, r)
    return PrivateKey(d1, d2, v)


def key_is_well_formed(params: PublicParams, key: PrivateKey) -> bool:
    """Public check ``e(d1, g) == e(g1, g2) * e(H(v), d2)``."""
    group = params.group
    lhs = group.pair(key.d1, params.g)
    rhs = group.mul_target(
        params.pair_g1_g2 if params.pair_g1_g2 is not None else group.pair(params.g1, params.g2),
        group.pair(hash_product(params, key.identity), key.d2),
    )
    return lhs == rhs


def encrypt(params: PublicParams, v: EncodedIdentity, m, rng=None, *, t=None) -> Ciphertext:
    group = params.group
    if t is None:
        t = group.random_scalar(rng or secrets.SystemRandom())
    mask_base = params.pair_g1_g2
    if mask_base is None:
        mask_base = group.pair(params.g1, params.g2)
    c1 = group.mul_target(group.exp_target(mask_base, t), m)
    c2 = group.exp(params.g, t)
    c3 = group.exp(hash_product(params, v), t)
    return Ciphertext(c1, c2, c3)


def decrypt(params: PublicParams, key: PrivateKey, ct: Ciphertext):
    """``c1 * e(d2, c3) / e(c2, d1)``."""
    group = params.group
    num = group.pair(key.d2, ct.c3)
    den = group.pair(ct.c2, key.d1)
    return group.mul_target(ct.c1, group.mul_target(num, group.inv_target(den)))
