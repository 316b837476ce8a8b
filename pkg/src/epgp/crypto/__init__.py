"""Algorithm suite: hashing, signatures, symmetric and asymmetric
encryption, and key generation behind a pluggable suite descriptor."""

from .keys import (
    KeyMaterial,
    KeyPair,
    KeyRole,
    PrivateKey,
    PublicKey,
    generate_keypair,
    generate_principal_keys,
)
from .ops import (
    Digest,
    Entropy,
    SessionKey,
    Signature,
    generate_session_key,
    hash_data,
    seal,
    sign,
    sym_decrypt,
    sym_encrypt,
    unseal,
    unwrap_key,
    verify,
    wrap_key,
)
from .suite import (
    CLASSIC,
    DEFAULT_SUITE_ID,
    MODERN,
    SUITES,
    AlgorithmSuite,
    get_suite,
)

__all__ = [
    "AlgorithmSuite",
    "CLASSIC",
    "DEFAULT_SUITE_ID",
    "Digest",
    "Entropy",
    "KeyMaterial",
    "KeyPair",
    "KeyRole",
    "MODERN",
    "PrivateKey",
    "PublicKey",
    "SUITES",
    "SessionKey",
    "Signature",
    "generate_keypair",
    "generate_principal_keys",
    "generate_session_key",
    "get_suite",
    "hash_data",
    "seal",
    "sign",
    "sym_decrypt",
    "sym_encrypt",
    "unseal",
    "unwrap_key",
    "verify",
    "wrap_key",
]
