"""Symmetric bilinear groups ``e : G x G -> G1`` with two interchangeable backends.

``ToyGroup`` is the additive group Z_p dressed up as a pairing group: the
"exponent" of an element is the element itself, so discrete logarithms are
free and every algebraic identity of the scheme can be checked exactly. It is
insecure by construction and exists for testing.

``CurveGroup`` binds BLS12-381 through ``py_ecc``. The curve pairing is
asymmetric, so each logical source element is stored *mirrored* as a pair
``(x*G1, x*G2)`` sharing one exponent ``x``; ``pair(a, b)`` pairs the first
component of ``a`` with the second component of ``b``. This keeps the
symmetric algebra intact at twice the storage cost.

Scalars are plain ``int`` values in ``[0, p)``. Randomness always comes from an
explicit ``rng`` argument (``random.Random`` for reproducible runs,
``secrets.SystemRandom`` for real keys).
"""

from __future__ import annotations

import abc
import enum
import secrets
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
from py_ecc import optimized_bls12_381 as bls
from py_ecc.bls.point_compression import (
    compress_G1,
    compress_G2,
    decompress_G1,
    decompress_G2,
)

from .errors import NonCanonicalEncoding, PointNotOnCurve, Unsupported, WrongLength

DEFAULT_TOY_PRIME = 1009
# Largest Mersenne prime that fits the 8-byte toy wire format.
WIRE_TOY_PRIME = 2**61 - 1


class BackendId(enum.IntEnum):
    TOY = 0x01
    CURVE = 0x02


@dataclass(frozen=True)
class GroupDescriptor:
    backend_id: BackendId
    p: int
    source_len: int
    target_len: int
    scalar_len: int
    # bytes of one source element if it were not mirrored
    logical_source_len: int


class BilinearGroup(abc.ABC):
    """Interface every backend implements.

    Group laws are written multiplicatively regardless of the backend.
    """

    p: int

    @property
    @abc.abstractmethod
    def descriptor(self) -> GroupDescriptor: ...

    @abc.abstractmethod
    def generator(self): ...

    @abc.abstractmethod
    def identity(self): ...

    @abc.abstractmethod
    def target_identity(self): ...

    def random_scalar(self, rng) -> int:
        # randrange rejection-samples from getrandbits: no modulo bias
        return rng.randrange(self.p)

    def random_element(self, rng):
        return self.exp(self.generator(), self.random_scalar(rng))

    def random_target(self, rng):
        return self.exp_target(self.pair_generator(), self.random_scalar(rng))

    def pair_generator(self):
        return self.pair(self.generator(), self.generator())

    @abc.abstractmethod
    def exp(self, base, e: int): ...

    @abc.abstractmethod
    def mul(self, a, b): ...

    @abc.abstractmethod
    def inv(self, a): ...

    def multi_exp(self, bases: Sequence, exponents: Sequence[int]):
        """Return ``prod(bases[i] ** exponents[i])``; counted as one exponentiation."""
        if len(bases) != len(exponents):
            raise ValueError("bases and exponents differ in length")
        acc = self.identity()
        for b, e in zip(bases, exponents):
            if e:
                acc = self.mul(acc, self.exp(b, e))
        return acc

    @abc.abstractmethod
    def pair(self, a, b): ...

    @abc.abstractmethod
    def exp_target(self, base, e: int): ...

    @abc.abstractmethod
    def mul_target(self, a, b): ...

    @abc.abstractmethod
    def inv_target(self, a): ...

    @abc.abstractmethod
    def serialize(self, x) -> bytes: ...

    @abc.abstractmethod
    def deserialize_source(self, data: bytes): ...

    @abc.abstractmethod
    def deserialize_target(self, data: bytes): ...

    def serialize_scalar(self, e: int) -> bytes:
        return (e % self.p).to_bytes(self.descriptor.scalar_len, "big")

    def deserialize_scalar(self, data: bytes) -> int:
        if len(data) != self.descriptor.scalar_len:
            raise WrongLength(f"scalar must be {self.descriptor.scalar_len} bytes, got {len(data)}")
        e = int.from_bytes(data, "big")
        if e >= self.p:
            raise NonCanonicalEncoding("scalar not reduced modulo the group order")
        return e

    def mirrors_consistent(self, elements: Sequence, rng=None) -> bool:
        """True when every element's stored components share one exponent."""
        return True

    def toy_dlog(self, x) -> int:
        raise Unsupported(f"discrete logarithms are not available on {type(self).__name__}")


# --------------------------------------------------------------------------
# toy backend


@dataclass(frozen=True, slots=True)
class ToySource:
    value: int


@dataclass(frozen=True, slots=True)
class ToyTarget:
    value: int


@dataclass(frozen=True)
class ToyGroup(BilinearGroup):
    """(Z_p, +) with generator 1 and pairing ``(x, y) -> x*y mod p``."""

    p: int = DEFAULT_TOY_PRIME

    def __post_init__(self):
        if not 2 < self.p < 2**64:
            raise ValueError("toy modulus must lie in (2, 2**64)")
        if not gmpy2.is_prime(self.p, 50):
            raise ValueError(f"toy modulus {self.p} is not prime")

    @property
    def descriptor(self) -> GroupDescriptor:
        return GroupDescriptor(BackendId.TOY, self.p, 8, 8, 8, 8)

    def generator(self):
        return ToySource(1)

    def identity(self):
        return ToySource(0)

    def target_identity(self):
        return ToyTarget(0)

    def exp(self, base, e):
        return ToySource(base.value * e % self.p)

    def mul(self, a, b):
        return ToySource((a.value + b.value) % self.p)

    def inv(self, a):
        return ToySource(-a.value % self.p)

    def multi_exp(self, bases, exponents):
        if len(bases) != len(exponents):
            raise ValueError("bases and exponents differ in length")
        return ToySource(sum(b.value * e for b, e in zip(bases, exponents)) % self.p)

    def pair(self, a, b):
        return ToyTarget(a.value * b.value % self.p)

    def exp_target(self, base, e):
        return ToyTarget(base.value * e % self.p)

    def mul_target(self, a, b):
        return ToyTarget((a.value + b.value) % self.p)

    def inv_target(self, a):
        return ToyTarget(-a.value % self.p)

    def serialize(self, x) -> bytes:
        return x.value.to_bytes(8, "big")

    def _decode(self, data: bytes) -> int:
        if len(data) != 8:
            raise WrongLength(f"toy element must be 8 bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >= self.p:
            raise NonCanonicalEncoding(f"toy element {v} is not reduced modulo {self.p}")
        return v

    def deserialize_source(self, data):
        return ToySource(self._decode(data))

    def deserialize_target(self, data):
        return ToyTarget(self._decode(data))

    def toy_dlog(self, x) -> int:
        # generator is 1, so the element is its own logarithm (works in both groups)
        return x.value


# --------------------------------------------------------------------------
# BLS12-381 backend

_R = bls.curve_order
_Q = bls.field_modulus
_FQ_LEN = 48


class CurveSource:
    """Mirrored source element ``(x*G1, x*G2)`` in projective coordinates."""

    __slots__ = ("p1", "p2")

    def __init__(self, p1, p2):
        self.p1 = p1
        self.p2 = p2

    def __eq__(self, other):
        if not isinstance(other, CurveSource):
            return NotImplemented
        return _point_eq(self.p1, other.p1) and _point_eq(self.p2, other.p2)

    def __hash__(self):
        return hash(CurveGroup().serialize(self))

    def __repr__(self):
        return f"CurveSource({CurveGroup().serialize(self)[:8].hex()}...)"


class CurveTarget:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __eq__(self, other):
        if not isinstance(other, CurveTarget):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(tuple(self.value.coeffs))

    def __repr__(self):
        return f"CurveTarget({int(self.value.coeffs[0]):x}...)"


def _point_eq(a, b) -> bool:
    inf_a, inf_b = bls.is_inf(a), bls.is_inf(b)
    if inf_a or inf_b:
        return inf_a and inf_b
    return bls.eq(a, b)


def _decompress(fn, z):
    try:
        return fn(z)
    except ValueError as exc:
        if "not on" in str(exc):
            raise PointNotOnCurve(str(exc)) from None
        raise NonCanonicalEncoding(str(exc)) from None


@lru_cache(maxsize=1)
def _gt_generator():
    return CurveTarget(bls.pairing(bls.G2, bls.G1))


@dataclass(frozen=True)
class CurveGroup(BilinearGroup):
    """BLS12-381 with mirrored elements realizing a symmetric pairing."""

    @property
    def p(self) -> int:
        return _R

    @property
    def descriptor(self) -> GroupDescriptor:
        return GroupDescriptor(BackendId.CURVE, _R, 3 * _FQ_LEN, 12 * _FQ_LEN, 32, _FQ_LEN)

    def generator(self):
        return CurveSource(bls.G1, bls.G2)

    def identity(self):
        return CurveSource(bls.Z1, bls.Z2)

    def target_identity(self):
        return CurveTarget(bls.FQ12.one())

    def pair_generator(self):
        return _gt_generator()

    def exp(self, base, e):
        e %= _R
        return CurveSource(bls.multiply(base.p1, e), bls.multiply(base.p2, e))

    def mul(self, a, b):
        return CurveSource(bls.add(a.p1, b.p1), bls.add(a.p2, b.p2))

    def inv(self, a):
        return CurveSource(bls.neg(a.p1), bls.neg(a.p2))

    def pair(self, a, b):
        if bls.is_inf(a.p1) or bls.is_inf(b.p2):
            return self.target_identity()
        return CurveTarget(bls.pairing(b.p2, a.p1))

    def exp_target(self, base, e):
        return CurveTarget(base.value ** (e % _R))

    def mul_target(self, a, b):
        return CurveTarget(a.value * b.value)

    def inv_target(self, a):
        return CurveTarget(a.value.inv())

    def serialize(self, x) -> bytes:
        if isinstance(x, CurveTarget):
            return b"".join(int(c).to_bytes(_FQ_LEN, "big") for c in x.value.coeffs)
        z1, z2 = compress_G2(x.p2)
        return (
            int(compress_G1(x.p1)).to_bytes(_FQ_LEN, "big")
            + int(z1).to_bytes(_FQ_LEN, "big")
            + int(z2).to_bytes(_FQ_LEN, "big")
        )

    def deserialize_source(self, data):
        if len(data) != 3 * _FQ_LEN:
            raise WrongLength(f"curve element must be {3 * _FQ_LEN} bytes, got {len(data)}")
        z = [int.from_bytes(data[i : i + _FQ_LEN], "big") for i in range(0, len(data), _FQ_LEN)]
        p1 = _decompress(decompress_G1, z[0])
        p2 = _decompress(decompress_G2, (z[1], z[2]))
        x = CurveSource(p1, p2)
        if self.serialize(x) != bytes(data):
            raise NonCanonicalEncoding("point encoding is not canonical")
        if not (bls.is_inf(bls.multiply(p1, _R)) and bls.is_inf(bls.multiply(p2, _R))):
            raise PointNotOnCurve("point is outside the prime-order subgroup")
        return x

    def deserialize_target(self, data):
        if len(data) != 12 * _FQ_LEN:
            raise WrongLength(f"target element must be {12 * _FQ_LEN} bytes, got {len(data)}")
        coeffs = [int.from_bytes(data[i : i + _FQ_LEN], "big") for i in range(0, len(data), _FQ_LEN)]
        if any(c >= _Q for c in coeffs):
            raise NonCanonicalEncoding("target coefficient not reduced modulo the field prime")
        value = bls.FQ12(coeffs)
        if value == bls.FQ12.zero() or value**_R != bls.FQ12.one():
            raise PointNotOnCurve("value is outside the order-r target subgroup")
        return CurveTarget(value)

    def mirrors_consistent(self, elements, rng=None) -> bool:
        # one random linear combination checks every element with two pairings
        rng = rng or secrets.SystemRandom()
        acc1, acc2 = bls.Z1, bls.Z2
        for x in elements:
            rho = rng.getrandbits(128) | 1
            acc1 = bls.add(acc1, bls.multiply(x.p1, rho))
            acc2 = bls.add(acc2, bls.multiply(x.p2, rho))
        if bls.is_inf(acc1) or bls.is_inf(acc2):
            return bls.is_inf(acc1) and bls.is_inf(acc2)
        return bls.pairing(bls.G2, acc1) == bls.pairing(acc2, bls.G1)


# --------------------------------------------------------------------------
# instrumentation


class CountingGroup(BilinearGroup):
    """Delegates to ``inner`` and tallies every group operation in ``counts``."""

    def __init__(self, inner: BilinearGroup):
        self.inner = inner
        self.counts: Counter = Counter()

    def reset(self):
        self.counts.clear()

    @property
    def p(self):
        return self.inner.p

    @property
    def descriptor(self):
        return self.inner.descriptor

    def generator(self):
        return self.inner.generator()

    def identity(self):
        return self.inner.identity()

    def target_identity(self):
        return self.inner.target_identity()

    def random_scalar(self, rng):
        return self.inner.random_scalar(rng)

    def _tick(self, name, *args):
        self.counts[name] += 1
        return getattr(self.inner, name)(*args)

    def exp(self, base, e):
        return self._tick("exp", base, e)

    def mul(self, a, b):
        return self._tick("mul", a, b)

    def inv(self, a):
        return self._tick("inv", a)

    def multi_exp(self, bases, exponents):
        return self._tick("multi_exp", bases, exponents)

    def pair(self, a, b):
        return self._tick("pair", a, b)

    def pair_generator(self):
        return self.inner.pair_generator()

    def exp_target(self, base, e):
        return self._tick("exp_target", base, e)

    def mul_target(self, a, b):
        return self._tick("mul_target", a, b)

    def inv_target(self, a):
        return self._tick("inv_target", a)

    def serialize(self, x):
        return self.inner.serialize(x)

    def deserialize_source(self, data):
        return self.inner.deserialize_source(data)

    def deserialize_target(self, data):
        return self.inner.deserialize_target(data)

    def mirrors_consistent(self, elements, rng=None):
        return self.inner.mirrors_consistent(elements, rng)

    def toy_dlog(self, x):
        return self.inner.toy_dlog(x)


def group_for_backend(backend_id: int, toy_prime: int = WIRE_TOY_PRIME) -> BilinearGroup:
    if backend_id == BackendId.TOY:
        return ToyGroup(toy_prime)
    if backend_id == BackendId.CURVE:
        return CurveGroup()
    raise Unsupported(f"unknown backend id 0x{backend_id:02x}")
