"""Cryptographic operations over suite-selected primitives.

Composes well-reviewed primitives (hashlib, the cryptography package)
behind the protocol's operation surface. Symmetric encryption prepends a
fresh random IV; key wrap is RSA-OAEP; sealing switches to a hybrid
(fresh symmetric key + wrap) when the payload exceeds direct OAEP
capacity. An injectable entropy callable replaces the default secure
random source where callers need reproducibility.

No operation places private-key or session-key bytes in reprs, error
messages, or any output other than the designated ciphertext fields.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field
from typing import Callable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import padding as blockpad
from cryptography.hazmat.primitives.asymmetric import ec, padding as asympad
from cryptography.hazmat.primitives.asymmetric.utils import Prehashed
from cryptography.hazmat.primitives.ciphers import Cipher, modes

from ..codec import frame, unframe_map
from ..errors import (
    BadPadding,
    FrameError,
    UnsealFailure,
    UnwrapFailure,
    WrongKeyRole,
)
from ..tags import Tag
from .keys import KeyRole, PrivateKey, PublicKey
from .suite import AlgorithmSuite, hash_spec, symmetric_spec, wrap_spec

Entropy = Callable[[int], bytes]

_SEAL_DIRECT = b"\x01"
_SEAL_HYBRID = b"\x02"


def _entropy_or_default(entropy: Entropy | None) -> Entropy:
    return entropy if entropy is not None else secrets.token_bytes


@dataclass(frozen=True)
class Digest:
    algorithm: str
    data: bytes

    def __post_init__(self) -> None:
        expected = hash_spec(self.algorithm).digest_size
        if len(self.data) != expected:
            raise ValueError(f"{self.algorithm} digest must be {expected} bytes, got {len(self.data)}")

    def hex(self) -> str:
        return self.data.hex()


@dataclass(frozen=True)
class Signature:
    algorithm: str
    signer: str
    data: bytes


@dataclass(frozen=True, repr=False)
class SessionKey:
    algorithm: str
    secret: bytes = field(compare=True)

    def __post_init__(self) -> None:
        expected = symmetric_spec(self.algorithm).key_size
        if len(self.secret) != expected:
            raise ValueError(f"{self.algorithm} session key must be {expected} bytes")

    def __repr__(self) -> str:  # never leak key bytes into logs
        return f"SessionKey(algorithm={self.algorithm!r}, <{len(self.secret)} secret bytes>)"


def hash_data(data: bytes, suite: AlgorithmSuite) -> Digest:
    """Digest bytes with the suite's hash algorithm; deterministic."""
    spec = hash_spec(suite.hash_id)
    return Digest(algorithm=suite.hash_id, data=hashlib.new(spec.hashlib_name, data).digest())


def _prehashed(digest: Digest):
    return Prehashed(hash_spec(digest.algorithm).primitive())


def sign(private: PrivateKey, digest: Digest) -> Signature:
    """Sign a digest; requires a signing-role key (WrongKeyRole otherwise)."""
    if private.role is not KeyRole.SIGNING:
        raise WrongKeyRole(f"{private.role.value} key cannot sign")
    key = private.impl()
    if isinstance(key, ec.EllipticCurvePrivateKey):
        raw = key.sign(digest.data, ec.ECDSA(_prehashed(digest)))
    else:
        raw = key.sign(digest.data, _prehashed(digest))
    return Signature(algorithm=private.algorithm, signer=private.owner, data=raw)


def verify(public: PublicKey, digest: Digest, signature: Signature) -> bool:
    """True iff the signature was produced over the digest by the matching
    private key; malformed input returns False rather than raising."""
    if public.role is not KeyRole.SIGNING:
        return False
    try:
        key = public.impl()
        if isinstance(key, ec.EllipticCurvePublicKey):
            key.verify(signature.data, digest.data, ec.ECDSA(_prehashed(digest)))
        else:
            key.verify(signature.data, digest.data, _prehashed(digest))
        return True
    except (InvalidSignature, ValueError, TypeError):
        return False


def generate_session_key(suite: AlgorithmSuite, entropy: Entropy | None = None) -> SessionKey:
    """Fresh symmetric key sized for the suite's cipher."""
    spec = symmetric_spec(suite.sym_id)
    return SessionKey(algorithm=suite.sym_id, secret=_entropy_or_default(entropy)(spec.key_size))


def sym_encrypt(key: SessionKey, data: bytes, entropy: Entropy | None = None) -> bytes:
    """CBC-encrypt with standard block padding; output is IV || ciphertext."""
    spec = symmetric_spec(key.algorithm)
    iv = _entropy_or_default(entropy)(spec.block_size)
    padder = blockpad.PKCS7(spec.block_size * 8).padder()
    padded = padder.update(data) + padder.finalize()
    enc = Cipher(spec.primitive(key.secret), modes.CBC(iv)).encryptor()
    return iv + enc.update(padded) + enc.finalize()


def sym_decrypt(key: SessionKey, data: bytes) -> bytes:
    """Inverse of sym_encrypt; BadPadding signals a wrong key or tampering."""
    spec = symmetric_spec(key.algorithm)
    block = spec.block_size
    if len(data) < 2 * block or (len(data) - block) % block != 0:
        raise BadPadding(f"ciphertext length {len(data)} invalid for {block}-byte blocks")
    iv, ciphertext = data[:block], data[block:]
    dec = Cipher(spec.primitive(key.secret), modes.CBC(iv)).decryptor()
    padded = dec.update(ciphertext) + dec.finalize()
    unpadder = blockpad.PKCS7(block * 8).unpadder()
    try:
        return unpadder.update(padded) + unpadder.finalize()
    except ValueError as exc:
        raise BadPadding(str(exc)) from None


def _oaep(wrap_id: str) -> asympad.OAEP:
    spec = wrap_spec(wrap_id)
    return asympad.OAEP(
        mgf=asympad.MGF1(algorithm=spec.oaep_hash()),
        algorithm=spec.oaep_hash(),
        label=None,
    )


def wrap_key(public: PublicKey, session_key: SessionKey) -> bytes:
    """Encrypt a session key to the recipient's public encryption key."""
    if public.role is not KeyRole.ENCRYPTION:
        raise WrongKeyRole(f"{public.role.value} key cannot wrap")
    return public.impl().encrypt(session_key.secret, _oaep(public.algorithm))


def unwrap_key(private: PrivateKey, wrapped: bytes, suite: AlgorithmSuite) -> SessionKey:
    """Inverse of wrap_key; UnwrapFailure on a mismatched key or bad blob."""
    if private.role is not KeyRole.ENCRYPTION:
        raise WrongKeyRole(f"{private.role.value} key cannot unwrap")
    try:
        secret = private.impl().decrypt(wrapped, _oaep(private.algorithm))
    except ValueError as exc:
        raise UnwrapFailure(f"key unwrap failed: {exc}") from None
    if len(secret) != symmetric_spec(suite.sym_id).key_size:
        raise UnwrapFailure("unwrapped key has wrong length for suite")
    return SessionKey(algorithm=suite.sym_id, secret=secret)


def seal(public: PublicKey, data: bytes, suite: AlgorithmSuite, entropy: Entropy | None = None) -> bytes:
    """Encrypt arbitrary bytes to a public encryption key.

    Uses direct OAEP when the payload fits the modulus capacity, otherwise
    a hybrid: fresh symmetric key, CBC encryption, and a wrapped key. The
    mode is recorded in the framed output.
    """
    if public.role is not KeyRole.ENCRYPTION:
        raise WrongKeyRole(f"{public.role.value} key cannot seal")
    if len(data) <= wrap_spec(public.algorithm).max_payload():
        ct = public.impl().encrypt(data, _oaep(public.algorithm))
        return frame([(Tag.SEAL_MODE, _SEAL_DIRECT), (Tag.SEAL_CT, ct)])
    session = generate_session_key(suite, entropy)
    return frame([
        (Tag.SEAL_MODE, _SEAL_HYBRID),
        (Tag.WRAPPED_KEY, wrap_key(public, session)),
        (Tag.SEAL_CT, sym_encrypt(session, data, entropy)),
    ])


def unseal(private: PrivateKey, blob: bytes, suite: AlgorithmSuite) -> bytes:
    """Inverse of seal; UnsealFailure on a mismatched key or corrupt blob."""
    if private.role is not KeyRole.ENCRYPTION:
        raise WrongKeyRole(f"{private.role.value} key cannot unseal")
    try:
        parts = unframe_map(blob, required=(Tag.SEAL_MODE, Tag.SEAL_CT))
        mode = parts[Tag.SEAL_MODE]
        if mode == _SEAL_DIRECT:
            return private.impl().decrypt(parts[Tag.SEAL_CT], _oaep(private.algorithm))
        if mode == _SEAL_HYBRID:
            if Tag.WRAPPED_KEY not in parts:
                raise UnsealFailure("hybrid seal missing wrapped key")
            session = unwrap_key(private, parts[Tag.WRAPPED_KEY], suite)
            return sym_decrypt(session, parts[Tag.SEAL_CT])
        raise UnsealFailure(f"unknown seal mode {mode!r}")
    except (FrameError, UnwrapFailure, BadPadding, ValueError) as exc:
        raise UnsealFailure(f"unseal failed: {exc}") from None
