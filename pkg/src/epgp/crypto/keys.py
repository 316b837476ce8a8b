"""Key material: per-principal signing and encryption pairs.

Signing and encryption pairs are distinct objects with distinct roles; role
misuse raises WrongKeyRole at the operation layer. Keys serialize as
tag+length frames around DER blobs; reprs never expose private bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import dsa, ec, rsa

from ..codec import frame, unframe_map
from ..errors import FrameError
from ..tags import Tag
from .suite import AlgorithmSuite, signature_spec, wrap_spec


class KeyRole(Enum):
    SIGNING = "signing"
    ENCRYPTION = "encryption"


@dataclass(frozen=True)
class PublicKey:
    owner: str
    role: KeyRole
    algorithm: str
    der: bytes  # SubjectPublicKeyInfo

    def impl(self):
        # DER parsing re-validates the key; memoize per instance
        cached = getattr(self, "_impl_cache", None)
        if cached is None:
            cached = serialization.load_der_public_key(self.der)
            object.__setattr__(self, "_impl_cache", cached)
        return cached

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.KEY_OWNER, self.owner.encode()),
            (Tag.KEY_ROLE, self.role.value.encode()),
            (Tag.KEY_ALG, self.algorithm.encode()),
            (Tag.KEY_PUBLIC_DER, self.der),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        parts = unframe_map(
            data,
            required=(Tag.KEY_OWNER, Tag.KEY_ROLE, Tag.KEY_ALG, Tag.KEY_PUBLIC_DER),
        )
        return cls(
            owner=parts[Tag.KEY_OWNER].decode(),
            role=KeyRole(parts[Tag.KEY_ROLE].decode()),
            algorithm=parts[Tag.KEY_ALG].decode(),
            der=parts[Tag.KEY_PUBLIC_DER],
        )


@dataclass(frozen=True, repr=False)
class PrivateKey:
    owner: str
    role: KeyRole
    algorithm: str
    der: bytes = field(compare=True)  # PKCS8, unencrypted in memory only

    def __repr__(self) -> str:  # never leak key bytes into logs
        return f"PrivateKey(owner={self.owner!r}, role={self.role.value}, algorithm={self.algorithm!r})"

    def impl(self):
        # RSA private-key DER loads re-run expensive validation; memoize
        cached = getattr(self, "_impl_cache", None)
        if cached is None:
            cached = serialization.load_der_private_key(self.der, password=None)
            object.__setattr__(self, "_impl_cache", cached)
        return cached

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.KEY_OWNER, self.owner.encode()),
            (Tag.KEY_ROLE, self.role.value.encode()),
            (Tag.KEY_ALG, self.algorithm.encode()),
            (Tag.KEY_PRIVATE_DER, self.der),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "PrivateKey":
        parts = unframe_map(
            data,
            required=(Tag.KEY_OWNER, Tag.KEY_ROLE, Tag.KEY_ALG, Tag.KEY_PRIVATE_DER),
        )
        return cls(
            owner=parts[Tag.KEY_OWNER].decode(),
            role=KeyRole(parts[Tag.KEY_ROLE].decode()),
            algorithm=parts[Tag.KEY_ALG].decode(),
            der=parts[Tag.KEY_PRIVATE_DER],
        )


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    private: PrivateKey
    role: KeyRole
    owner: str


@dataclass(frozen=True)
class KeyMaterial:
    """Both key pairs for one principal."""

    owner: str
    signing: KeyPair
    encryption: KeyPair
    suite_id: str

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.KEY_OWNER, self.owner.encode()),
            (Tag.SUITE_ID, self.suite_id.encode()),
            (Tag.SIGNING_KEY, frame([
                (Tag.KEY_PUBLIC_DER, self.signing.public.to_bytes()),
                (Tag.KEY_PRIVATE_DER, self.signing.private.to_bytes()),
            ])),
            (Tag.ENCRYPTION_KEY, frame([
                (Tag.KEY_PUBLIC_DER, self.encryption.public.to_bytes()),
                (Tag.KEY_PRIVATE_DER, self.encryption.private.to_bytes()),
            ])),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeyMaterial":
        parts = unframe_map(
            data,
            required=(Tag.KEY_OWNER, Tag.SUITE_ID, Tag.SIGNING_KEY, Tag.ENCRYPTION_KEY),
        )
        owner = parts[Tag.KEY_OWNER].decode()
        pairs = {}
        for tag, role in ((Tag.SIGNING_KEY, KeyRole.SIGNING), (Tag.ENCRYPTION_KEY, KeyRole.ENCRYPTION)):
            inner = unframe_map(parts[tag], required=(Tag.KEY_PUBLIC_DER, Tag.KEY_PRIVATE_DER))
            public = PublicKey.from_bytes(inner[Tag.KEY_PUBLIC_DER])
            private = PrivateKey.from_bytes(inner[Tag.KEY_PRIVATE_DER])
            if public.role is not role or private.role is not role:
                raise FrameError(f"key blob role does not match its {role.value} slot")
            pairs[role] = KeyPair(public=public, private=private, role=role, owner=owner)
        return cls(
            owner=owner,
            signing=pairs[KeyRole.SIGNING],
            encryption=pairs[KeyRole.ENCRYPTION],
            suite_id=parts[Tag.SUITE_ID].decode(),
        )


def _public_der(key) -> bytes:
    return key.public_key().public_bytes(
        serialization.Encoding.DER,
        serialization.PublicFormat.SubjectPublicKeyInfo,
    )


def _private_der(key) -> bytes:
    return key.private_bytes(
        serialization.Encoding.DER,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )


def generate_keypair(owner: str, role: KeyRole, suite: AlgorithmSuite) -> KeyPair:
    """Generate one pair for the given role from a secure random source."""
    if role is KeyRole.SIGNING:
        spec = signature_spec(suite.sig_id)
        if spec.kind == "dsa":
            key = dsa.generate_private_key(key_size=spec.key_size)
        else:
            key = ec.generate_private_key(ec.SECP256R1())
        algorithm = suite.sig_id
    else:
        wspec = wrap_spec(suite.wrap_id)
        key = rsa.generate_private_key(public_exponent=65537, key_size=wspec.modulus_bits)
        algorithm = suite.wrap_id
    public = PublicKey(owner=owner, role=role, algorithm=algorithm, der=_public_der(key))
    private = PrivateKey(owner=owner, role=role, algorithm=algorithm, der=_private_der(key))
    return KeyPair(public=public, private=private, role=role, owner=owner)


def generate_principal_keys(owner: str, suite: AlgorithmSuite) -> KeyMaterial:
    """Generate the full signing + encryption key material for a principal."""
    return KeyMaterial(
        owner=owner,
        signing=generate_keypair(owner, KeyRole.SIGNING, suite),
        encryption=generate_keypair(owner, KeyRole.ENCRYPTION, suite),
        suite_id=suite.suite_id,
    )
