"""User registration, password authentication, and the public-key directory.

Key pairs are generated client-side; the server stores only public halves
and a salted password hash. The hash scheme is a pluggable slot defaulting
to scrypt (memory-hard, cost-configurable). Authentication is constant-time
and indistinguishable between unknown users and wrong passwords.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable, Protocol

from .codec import frame, unframe_map
from .crypto import (
    AlgorithmSuite,
    KeyMaterial,
    KeyRole,
    PublicKey,
    generate_principal_keys,
)
from .errors import (
    AuthRequired,
    BadCredentials,
    EmailTaken,
    UnknownPrincipal,
    WeakPassword,
)
from .tags import Tag

MIN_PASSWORD_LENGTH = 8
DEFAULT_TOKEN_TTL = 3600  # seconds
TOKEN_BYTES = 16  # 128-bit


class PasswordHasher(Protocol):
    algorithm: str

    def hash(self, password: str) -> str: ...
    def verify(self, password: str, blob: str) -> bool: ...


class ScryptHasher:
    """scrypt password hashing; cost is the log2 of the CPU/memory work factor."""

    algorithm = "scrypt"

    def __init__(self, log2_n: int = 14, r: int = 8, p: int = 1) -> None:
        self._log2_n = log2_n
        self._r = r
        self._p = p

    def _derive(self, password: str, salt: bytes, log2_n: int, r: int, p: int) -> bytes:
        return hashlib.scrypt(
            password.encode(), salt=salt, n=1 << log2_n, r=r, p=p, maxmem=256 * 1024 * 1024,
        )

    def hash(self, password: str) -> str:
        salt = secrets.token_bytes(16)
        dk = self._derive(password, salt, self._log2_n, self._r, self._p)
        return f"scrypt${self._log2_n}${self._r}${self._p}${salt.hex()}${dk.hex()}"

    def verify(self, password: str, blob: str) -> bool:
        try:
            name, log2_n, r, p, salt_hex, dk_hex = blob.split("$")
            if name != "scrypt":
                return False
            dk = self._derive(password, bytes.fromhex(salt_hex), int(log2_n), int(r), int(p))
            return hmac.compare_digest(dk, bytes.fromhex(dk_hex))
        except (ValueError, TypeError):
            return False


class Pbkdf2Hasher:
    algorithm = "pbkdf2"

    def __init__(self, iterations: int = 600_000) -> None:
        self._iterations = iterations

    def hash(self, password: str) -> str:
        salt = secrets.token_bytes(16)
        dk = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, self._iterations)
        return f"pbkdf2${self._iterations}${salt.hex()}${dk.hex()}"

    def verify(self, password: str, blob: str) -> bool:
        try:
            name, iterations, salt_hex, dk_hex = blob.split("$")
            if name != "pbkdf2":
                return False
            dk = hashlib.pbkdf2_hmac(
                "sha256", password.encode(), bytes.fromhex(salt_hex), int(iterations),
            )
            return hmac.compare_digest(dk, bytes.fromhex(dk_hex))
        except (ValueError, TypeError):
            return False


PASSWORD_HASHERS: dict[str, Callable[..., PasswordHasher]] = {
    "scrypt": ScryptHasher,
    "pbkdf2": Pbkdf2Hasher,
}


def make_hasher(algorithm: str = "scrypt", **params) -> PasswordHasher:
    try:
        factory = PASSWORD_HASHERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown password hash algorithm: {algorithm!r}") from None
    return factory(**params)


@dataclass(frozen=True)
class UserRecord:
    email: str
    password_blob: str
    signing_pub: PublicKey
    encryption_pub: PublicKey
    created_at: int

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.KEY_OWNER, self.email.encode()),
            (Tag.PW_BLOB, self.password_blob.encode()),
            (Tag.SIGNING_KEY, self.signing_pub.to_bytes()),
            (Tag.ENCRYPTION_KEY, self.encryption_pub.to_bytes()),
            (Tag.CREATED_AT, self.created_at.to_bytes(8, "big")),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "UserRecord":
        parts = unframe_map(data, required=(
            Tag.KEY_OWNER, Tag.PW_BLOB, Tag.SIGNING_KEY, Tag.ENCRYPTION_KEY, Tag.CREATED_AT,
        ))
        return cls(
            email=parts[Tag.KEY_OWNER].decode(),
            password_blob=parts[Tag.PW_BLOB].decode(),
            signing_pub=PublicKey.from_bytes(parts[Tag.SIGNING_KEY]),
            encryption_pub=PublicKey.from_bytes(parts[Tag.ENCRYPTION_KEY]),
            created_at=int.from_bytes(parts[Tag.CREATED_AT], "big"),
        )


def normalize_email(email: str) -> str:
    email = email.strip().lower()
    if not email or " " in email or "\n" in email:
        raise ValueError(f"invalid principal id: {email!r}")
    return email


class Directory:
    """Account store plus session-token issuance.

    Persistence goes through a storage backend (one record per user);
    session tokens are held in memory only and expire after the TTL.
    """

    def __init__(
        self,
        storage,
        hasher: PasswordHasher | None = None,
        clock: Callable[[], float] = time.time,
        token_source: Callable[[int], bytes] = secrets.token_bytes,
        token_ttl: int = DEFAULT_TOKEN_TTL,
    ) -> None:
        self._storage = storage
        self._hasher = hasher if hasher is not None else ScryptHasher()
        self._clock = clock
        self._token_source = token_source
        self._token_ttl = token_ttl
        self._lock = threading.Lock()
        self._tokens: dict[str, tuple[str, float]] = {}
        # burn comparable time for unknown users so lookups don't leak
        self._decoy_blob = self._hasher.hash("decoy-password")

    def create_user(
        self,
        email: str,
        password: str,
        signing_pub: PublicKey,
        encryption_pub: PublicKey,
    ) -> UserRecord:
        email = normalize_email(email)
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        if signing_pub.role is not KeyRole.SIGNING or encryption_pub.role is not KeyRole.ENCRYPTION:
            raise ValueError("public keys must be one signing and one encryption key")
        with self._lock:
            if self._storage.get_user(email) is not None:
                raise EmailTaken(email)
            record = UserRecord(
                email=email,
                password_blob=self._hasher.hash(password),
                signing_pub=signing_pub,
                encryption_pub=encryption_pub,
                created_at=int(self._clock()),
            )
            self._storage.put_user(email, record.to_bytes())
        return record

    def _get_record(self, email: str) -> UserRecord | None:
        data = self._storage.get_user(email)
        return UserRecord.from_bytes(data) if data is not None else None

    def authenticate(self, email: str, password: str) -> str:
        """Issue a fresh expiring session token; BadCredentials is identical
        for unknown users and wrong passwords."""
        try:
            email = normalize_email(email)
        except ValueError:
            raise BadCredentials("bad credentials") from None
        record = self._get_record(email)
        blob = record.password_blob if record is not None else self._decoy_blob
        ok = self._hasher.verify(password, blob)
        if record is None or not ok:
            raise BadCredentials("bad credentials")
        token = self._token_source(TOKEN_BYTES).hex()
        with self._lock:
            self._tokens[token] = (email, self._clock() + self._token_ttl)
        return token

    def validate_token(self, token: str) -> str:
        """Resolve a session token to its principal; AuthRequired otherwise."""
        with self._lock:
            entry = self._tokens.get(token)
            if entry is None:
                raise AuthRequired("missing or unknown session token")
            email, expires = entry
            if self._clock() >= expires:
                del self._tokens[token]
                raise AuthRequired("session token expired")
            return email

    def exists(self, email: str) -> bool:
        return self._storage.get_user(normalize_email(email)) is not None

    def lookup_public_key(self, email: str, role: KeyRole) -> PublicKey:
        record = self._get_record(normalize_email(email))
        if record is None:
            raise UnknownPrincipal(email)
        return record.signing_pub if role is KeyRole.SIGNING else record.encryption_pub

    def admin_reset_password(self, email: str, new_password: str) -> None:
        """Out-of-band password reset (operator CLI); replaces recovery mail."""
        email = normalize_email(email)
        if len(new_password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        with self._lock:
            record = self._get_record(email)
            if record is None:
                raise UnknownPrincipal(email)
            updated = UserRecord(
                email=record.email,
                password_blob=self._hasher.hash(new_password),
                signing_pub=record.signing_pub,
                encryption_pub=record.encryption_pub,
                created_at=record.created_at,
            )
            self._storage.put_user(email, updated.to_bytes())


def register_principal(
    directory: Directory,
    email: str,
    password: str,
    suite: AlgorithmSuite,
) -> KeyMaterial:
    """Client-side registration: generate both key pairs locally and upload
    only the public halves."""
    keys = generate_principal_keys(normalize_email(email), suite)
    directory.create_user(email, password, keys.signing.public, keys.encryption.public)
    return keys
