"""Identity-based encryption with compact public parameters, plus an executable security reduction."""

from .bilinear import BackendId, CountingGroup, CurveGroup, ToyGroup
from .ibe import (
    Ciphertext,
    EncodedIdentity,
    HashId,
    MasterSecret,
    PrivateKey,
    PublicParams,
    SchemeConfig,
    decrypt,
    encode_identity,
    encrypt,
    hash_product,
    keygen,
    precompute_pair,
    setup,
)

__all__ = [
    "BackendId",
    "Ciphertext",
    "CountingGroup",
    "CurveGroup",
    "EncodedIdentity",
    "HashId",
    "MasterSecret",
    "PrivateKey",
    "PublicParams",
    "SchemeConfig",
    "ToyGroup",
    "decrypt",
    "encode_identity",
    "encrypt",
    "hash_product",
    "keygen",
    "precompute_pair",
    "setup",
]
