import pytest

from epgp.crypto import CLASSIC, KeyRole
from epgp.directory import (
    Directory,
    Pbkdf2Hasher,
    ScryptHasher,
    make_hasher,
    register_principal,
)
from epgp.errors import (
    AuthRequired,
    BadCredentials,
    EmailTaken,
    UnknownPrincipal,
    WeakPassword,
)
from epgp.server import MemoryStorage

from conftest import ALICE, BOB


def make_directory(clock=None, **kwargs):
    kwargs.setdefault("hasher", ScryptHasher(log2_n=4))
    if clock is not None:
        kwargs["clock"] = clock
    return Directory(MemoryStorage(), **kwargs)


def test_register_then_lookup(alice):
    directory = make_directory()
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    assert directory.lookup_public_key(ALICE, KeyRole.SIGNING) == alice.signing.public
    assert directory.lookup_public_key(ALICE, KeyRole.ENCRYPTION) == alice.encryption.public
    assert directory.lookup_public_key(ALICE, KeyRole.SIGNING) != directory.lookup_public_key(
        ALICE, KeyRole.ENCRYPTION,
    )


def test_duplicate_email_rejected(alice, bob):
    directory = make_directory()
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    with pytest.raises(EmailTaken):
        directory.create_user(ALICE, "password-2", bob.signing.public, bob.encryption.public)
    with pytest.raises(EmailTaken):  # case-insensitive uniqueness
        directory.create_user(ALICE.upper(), "password-2", bob.signing.public, bob.encryption.public)


def test_weak_password_rejected(alice):
    directory = make_directory()
    with pytest.raises(WeakPassword):
        directory.create_user(ALICE, "short", alice.signing.public, alice.encryption.public)


def test_registered_user_can_authenticate(alice):
    directory = make_directory()
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    token = directory.authenticate(ALICE, "password-1")
    assert directory.validate_token(token) == ALICE
    assert len(token) >= 32  # 128-bit hex


def test_bad_credentials_uniform(alice):
    directory = make_directory()
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    with pytest.raises(BadCredentials) as wrong_pw:
        directory.authenticate(ALICE, "not-the-password")
    with pytest.raises(BadCredentials) as unknown:
        directory.authenticate("nobody@unit.test", "password-1")
    assert str(wrong_pw.value) == str(unknown.value)


def test_token_expiry(alice):
    now = [1000.0]
    directory = make_directory(clock=lambda: now[0], token_ttl=60)
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    token = directory.authenticate(ALICE, "password-1")
    assert directory.validate_token(token) == ALICE
    now[0] += 61
    with pytest.raises(AuthRequired):
        directory.validate_token(token)


def test_unknown_token_rejected():
    directory = make_directory()
    with pytest.raises(AuthRequired):
        directory.validate_token("deadbeef" * 4)


def test_lookup_unknown_principal():
    directory = make_directory()
    with pytest.raises(UnknownPrincipal):
        directory.lookup_public_key("ghost@unit.test", KeyRole.SIGNING)


def test_same_password_different_hashes():
    hasher = ScryptHasher(log2_n=4)
    a = hasher.hash("shared password")
    b = hasher.hash("shared password")
    assert a != b  # salted
    assert hasher.verify("shared password", a)
    assert hasher.verify("shared password", b)
    assert not hasher.verify("other password", a)


def test_pbkdf2_slot():
    hasher = make_hasher("pbkdf2", iterations=1000)
    assert isinstance(hasher, Pbkdf2Hasher)
    blob = hasher.hash("another password")
    assert hasher.verify("another password", blob)
    assert not hasher.verify("bad", blob)
    with pytest.raises(ValueError):
        make_hasher("md5-unsalted")


def test_admin_reset(alice):
    directory = make_directory()
    directory.create_user(ALICE, "password-1", alice.signing.public, alice.encryption.public)
    directory.admin_reset_password(ALICE, "password-new")
    with pytest.raises(BadCredentials):
        directory.authenticate(ALICE, "password-1")
    assert directory.validate_token(directory.authenticate(ALICE, "password-new")) == ALICE
    with pytest.raises(UnknownPrincipal):
        directory.admin_reset_password("ghost@unit.test", "password-new")


def test_register_principal_keeps_private_keys_client_side():
    storage = MemoryStorage()
    directory = Directory(storage, hasher=ScryptHasher(log2_n=4))
    keys = register_principal(directory, BOB, "password-9", CLASSIC)
    token = directory.authenticate(BOB, "password-9")
    assert directory.validate_token(token) == BOB
    # the server-side store must contain zero private-key bytes
    stored = b"".join(storage.list_users())
    assert keys.signing.private.der not in stored
    assert keys.encryption.private.der not in stored
    assert keys.signing.public.der in stored
