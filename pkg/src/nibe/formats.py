"""Binary file formats and the KEM-DEM envelope.

All four files share an 11-byte header::

    magic(4) | version(1) | backend_id(1) | n(2, BE) | ell(2, BE) | hash_id(1)

followed by fixed-length serialized group elements. Toy-backend files always
use the modulus :data:`nibe.bilinear.WIRE_TOY_PRIME` because the header has no
slot for it.

Envelopes carry the IBE encryption of a random target element ``M`` plus an
AES-256-GCM ciphertext of the payload under ``SHA-256("NIBE-KDF-v1" || M)``.
Everything in front of the GCM ciphertext is bound as associated data.
"""

from __future__ import annotations

import hashlib
import os
import secrets
import struct
import tempfile
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .bilinear import BackendId, BilinearGroup, group_for_backend
from .errors import (
    BadMagic,
    FormatError,
    HeaderMismatch,
    InconsistentParams,
    MalformedKey,
    TagMismatch,
    UnsupportedVersion,
    WrongLength,
)
from .ibe import (
    Ciphertext,
    HashId,
    MasterSecret,
    PrivateKey,
    PublicParams,
    SchemeConfig,
    decrypt,
    encode_identity,
    encrypt,
    key_is_well_formed,
)

VERSION = 0x01
PARAMS_MAGIC = b"NIBE"
KEY_MAGIC = b"NIBK"
ENVELOPE_MAGIC = b"NIBC"
MASTER_MAGIC = b"NIBM"

KDF_LABEL = b"NIBE-KDF-v1"
DEM_AES256_GCM = 0x01
NONCE_LEN = 12
TAG_LEN = 16

_HEADER = struct.Struct(">4sBBHHB")


@dataclass(frozen=True)
class Header:
    magic: bytes
    backend_id: BackendId
    config: SchemeConfig

    def pack(self) -> bytes:
        c = self.config
        return _HEADER.pack(self.magic, VERSION, self.backend_id, c.n, c.ell, c.hash_id)

    def same_scheme(self, other: "Header") -> bool:
        return self.backend_id == other.backend_id and self.config == other.config


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise WrongLength(f"input truncated at byte {len(self.data)}, need {self.pos + count}")
        chunk = self.data[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def rest(self) -> bytes:
        chunk = self.data[self.pos :]
        self.pos = len(self.data)
        return chunk

    def done(self):
        if self.pos != len(self.data):
            raise WrongLength(f"{len(self.data) - self.pos} trailing bytes")


def _read_header(r: _Reader, magic: bytes) -> Header:
    raw = r.take(_HEADER.size)
    got_magic, version, backend, n, ell, hash_id = _HEADER.unpack(raw)
    if got_magic != magic:
        raise BadMagic(f"expected magic {magic!r}, got {got_magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"unknown format version {version}")
    try:
        backend = BackendId(backend)
        config = SchemeConfig(n, ell, HashId(hash_id))
    except ValueError as exc:
        raise FormatError(f"invalid header: {exc}") from None
    return Header(magic, backend, config)


def _group(header: Header) -> BilinearGroup:
    group = group_for_backend(header.backend_id)
    try:
        header.config.check_group(group)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return group


def _source(r, group):
    return group.deserialize_source(r.take(group.descriptor.source_len))


def _target(r, group):
    return group.deserialize_target(r.take(group.descriptor.target_len))


# --------------------------------------------------------------------------
# public parameters


def dump_params(params: PublicParams) -> bytes:
    group = params.group
    header = Header(PARAMS_MAGIC, group.descriptor.backend_id, params.config)
    pair = params.pair_g1_g2 if params.pair_g1_g2 is not None else group.pair(params.g1, params.g2)
    return header.pack() + b"".join(group.serialize(x) for x in params.elements()) + group.serialize(pair)


def load_params(data: bytes, *, verify: bool = True) -> PublicParams:
    """Parse a params file; ``verify`` re-checks the cache, generator and mirrors."""
    r = _Reader(data)
    header = _read_header(r, PARAMS_MAGIC)
    group = _group(header)
    n = header.config.n
    elems = [_source(r, group) for _ in range(n + 4)]
    pair = _target(r, group)
    r.done()
    g, g1, g2, u_prime, *u = elems
    params = PublicParams(header.config, group, g, g1, g2, u_prime, tuple(u), pair)
    if verify:
        if g != group.generator():
            raise InconsistentParams("g is not the backend's canonical generator")
        if not group.mirrors_consistent(elems):
            raise InconsistentParams("mirrored element components disagree")
        if group.pair(g1, g2) != pair:
            raise InconsistentParams("cached e(g1, g2) does not match g1 and g2")
    return params


def params_header(data: bytes) -> Header:
    return _read_header(_Reader(data), PARAMS_MAGIC)


# --------------------------------------------------------------------------
# master secret


def dump_master(params: PublicParams, master: MasterSecret) -> bytes:
    group = params.group
    header = Header(MASTER_MAGIC, group.descriptor.backend_id, params.config)
    out = header.pack() + group.serialize(master.g2_alpha)
    if master.alpha is None:
        return out + b"\x00"
    return out + b"\x01" + group.serialize_scalar(master.alpha)


def load_master(data: bytes, params: PublicParams) -> MasterSecret:
    r = _Reader(data)
    header = _read_header(r, MASTER_MAGIC)
    if not header.same_scheme(Header(PARAMS_MAGIC, params.group.descriptor.backend_id, params.config)):
        raise HeaderMismatch("master secret belongs to a different scheme instance")
    group = params.group
    g2_alpha = _source(r, group)
    flag = r.take(1)[0]
    if flag not in (0, 1):
        raise FormatError("bad oracle flag")
    alpha = group.deserialize_scalar(r.take(group.descriptor.scalar_len)) if flag else None
    r.done()
    if not group.mirrors_consistent([g2_alpha]):
        raise InconsistentParams("mirrored element components disagree")
    # e(g2^alpha, g) == e(g1, g2) ties the master to these params
    if group.pair(g2_alpha, params.g) != params.pair_g1_g2:
        raise InconsistentParams("master secret does not match the public parameters")
    return MasterSecret(g2_alpha, alpha)


# --------------------------------------------------------------------------
# private keys


def dump_key(params: PublicParams, key: PrivateKey, identity: bytes) -> bytes:
    group = params.group
    if len(identity) > 0xFFFF:
        raise ValueError("identity longer than 65535 bytes")
    header = Header(KEY_MAGIC, group.descriptor.backend_id, params.config)
    return (
        header.pack()
        + struct.pack(">H", len(identity))
        + identity
        + group.serialize(key.d1)
        + group.serialize(key.d2)
    )


def load_key(data: bytes, params: PublicParams) -> tuple:
    """Parse and validate a key file. Returns ``(PrivateKey, identity_bytes)``."""
    r = _Reader(data)
    header = _read_header(r, KEY_MAGIC)
    if not header.same_scheme(Header(PARAMS_MAGIC, params.group.descriptor.backend_id, params.config)):
        raise HeaderMismatch("key belongs to a different scheme instance")
    group = params.group
    (id_len,) = struct.unpack(">H", r.take(2))
    identity = r.take(id_len)
    d1 = _source(r, group)
    d2 = _source(r, group)
    r.done()
    key = PrivateKey(d1, d2, encode_identity(identity, params.config))
    if not group.mirrors_consistent([d1, d2]):
        raise MalformedKey("mirrored element components disagree")
    if not key_is_well_formed(params, key):
        raise MalformedKey("key fails the pairing check for its identity")
    return key, identity


# --------------------------------------------------------------------------
# KEM-DEM envelopes


def derive_key(group: BilinearGroup, M) -> bytes:
    return hashlib.sha256(KDF_LABEL + group.serialize(M)).digest()


def seal(params: PublicParams, identity: bytes, payload: bytes, rng=None) -> bytes:
    rng = rng or secrets.SystemRandom()
    group = params.group
    M = group.random_target(rng)
    ct = encrypt(params, encode_identity(identity, params.config), M, rng)
    header = Header(ENVELOPE_MAGIC, group.descriptor.backend_id, params.config)
    nonce = rng.getrandbits(8 * NONCE_LEN).to_bytes(NONCE_LEN, "big")
    prefix = (
        header.pack()
        + group.serialize(ct.c1)
        + group.serialize(ct.c2)
        + group.serialize(ct.c3)
        + bytes([DEM_AES256_GCM])
        + nonce
    )
    return prefix + AESGCM(derive_key(group, M)).encrypt(nonce, payload, prefix)


def open_envelope(params: PublicParams, key: PrivateKey, data: bytes) -> bytes:
    """Decrypt an envelope. Raises :class:`TagMismatch` unless the DEM tag verifies."""
    r = _Reader(data)
    header = _read_header(r, ENVELOPE_MAGIC)
    if not header.same_scheme(Header(PARAMS_MAGIC, params.group.descriptor.backend_id, params.config)):
        raise HeaderMismatch("envelope belongs to a different scheme instance")
    group = params.group
    c1 = _target(r, group)
    c2 = _source(r, group)
    c3 = _source(r, group)
    dem = r.take(1)[0]
    if dem != DEM_AES256_GCM:
        raise FormatError(f"unknown DEM algorithm id 0x{dem:02x}")
    nonce = r.take(NONCE_LEN)
    prefix = data[: r.pos]
    body = r.rest()
    if len(body) < TAG_LEN:
        raise WrongLength("DEM ciphertext shorter than its tag")
    M = decrypt(params, key, Ciphertext(c1, c2, c3))
    try:
        return AESGCM(derive_key(group, M)).decrypt(nonce, body, prefix)
    except InvalidTag:
        raise TagMismatch("authentication tag does not verify") from None


# --------------------------------------------------------------------------
# file IO


def write_atomic(path, data: bytes, mode: int = 0o644):
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nibe-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, mode)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()
