"""Algorithm suite registry.

A suite names one algorithm per slot (hash, signature, symmetric cipher,
key wrap) by registry id. The "classic" profile keeps the original
SHA-1 / DSA / TripleDES-CBC / RSA combination; the "modern" profile swaps
in SHA-256 / ECDSA-P256 / AES-128-CBC / RSA-OAEP-SHA256. Unknown ids are
rejected at construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.hazmat.decrepit.ciphers.algorithms import TripleDES
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import algorithms

from ..errors import UnknownAlgorithm


@dataclass(frozen=True)
class HashSpec:
    hash_id: str
    digest_size: int
    hashlib_name: str
    primitive: type


@dataclass(frozen=True)
class SignatureSpec:
    sig_id: str
    kind: str        # "dsa" | "ecdsa"
    key_size: int    # DSA modulus bits; ECDSA ignores this
    curve: str | None = None


@dataclass(frozen=True)
class SymmetricSpec:
    sym_id: str
    key_size: int    # bytes
    block_size: int  # bytes
    primitive: type


@dataclass(frozen=True)
class WrapSpec:
    wrap_id: str
    modulus_bits: int
    oaep_hash: type

    @property
    def wrapped_size(self) -> int:
        return self.modulus_bits // 8

    def max_payload(self) -> int:
        hash_len = self.oaep_hash().digest_size
        return self.wrapped_size - 2 * hash_len - 2


HASHES: dict[str, HashSpec] = {
    "sha1": HashSpec("sha1", 20, "sha1", hashes.SHA1),
    "sha256": HashSpec("sha256", 32, "sha256", hashes.SHA256),
}

SIGNATURES: dict[str, SignatureSpec] = {
    "dsa-1024": SignatureSpec("dsa-1024", "dsa", 1024),
    "ecdsa-p256": SignatureSpec("ecdsa-p256", "ecdsa", 256, curve="secp256r1"),
}

SYMMETRIC: dict[str, SymmetricSpec] = {
    "tripledes-cbc": SymmetricSpec("tripledes-cbc", 24, 8, TripleDES),
    "aes128-cbc": SymmetricSpec("aes128-cbc", 16, 16, algorithms.AES128),
}

WRAPS: dict[str, WrapSpec] = {
    "rsa-2048-oaep-sha1": WrapSpec("rsa-2048-oaep-sha1", 2048, hashes.SHA1),
    "rsa-2048-oaep-sha256": WrapSpec("rsa-2048-oaep-sha256", 2048, hashes.SHA256),
}


def _lookup(registry: dict, kind: str, alg_id: str):
    try:
        return registry[alg_id]
    except KeyError:
        raise UnknownAlgorithm(f"unknown {kind} algorithm: {alg_id!r}") from None


def hash_spec(hash_id: str) -> HashSpec:
    return _lookup(HASHES, "hash", hash_id)


def signature_spec(sig_id: str) -> SignatureSpec:
    return _lookup(SIGNATURES, "signature", sig_id)


def symmetric_spec(sym_id: str) -> SymmetricSpec:
    return _lookup(SYMMETRIC, "symmetric", sym_id)


def wrap_spec(wrap_id: str) -> WrapSpec:
    return _lookup(WRAPS, "key-wrap", wrap_id)


@dataclass(frozen=True)
class AlgorithmSuite:
    """One named selection of hash, signature, cipher, and wrap algorithms."""

    suite_id: str
    hash_id: str
    sig_id: str
    sym_id: str
    wrap_id: str

    def __post_init__(self) -> None:
        hash_spec(self.hash_id)
        signature_spec(self.sig_id)
        symmetric_spec(self.sym_id)
        wrap_spec(self.wrap_id)

    @property
    def hash(self) -> HashSpec:
        return hash_spec(self.hash_id)

    @property
    def signature(self) -> SignatureSpec:
        return signature_spec(self.sig_id)

    @property
    def symmetric(self) -> SymmetricSpec:
        return symmetric_spec(self.sym_id)

    @property
    def wrap(self) -> WrapSpec:
        return wrap_spec(self.wrap_id)


CLASSIC = AlgorithmSuite("classic", "sha1", "dsa-1024", "tripledes-cbc", "rsa-2048-oaep-sha1")
MODERN = AlgorithmSuite("modern", "sha256", "ecdsa-p256", "aes128-cbc", "rsa-2048-oaep-sha256")

SUITES: dict[str, AlgorithmSuite] = {s.suite_id: s for s in (CLASSIC, MODERN)}
DEFAULT_SUITE_ID = CLASSIC.suite_id


def get_suite(suite_id: str) -> AlgorithmSuite:
    try:
        return SUITES[suite_id]
    except KeyError:
        raise UnknownAlgorithm(f"unknown suite: {suite_id!r}") from None
