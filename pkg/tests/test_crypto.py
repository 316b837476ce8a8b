import random

import pytest

from epgp.crypto import (
    CLASSIC,
    MODERN,
    AlgorithmSuite,
    Digest,
    KeyRole,
    generate_keypair,
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
from epgp.errors import BadPadding, UnknownAlgorithm, UnsealFailure, UnwrapFailure, WrongKeyRole

from oracles import dsa_verify_ref

# frozen after recomputation with the independent pure-Python SHA-1 oracle
SHA1_ABC = "a9993e364706816aba3e25717850c26c9cd0d89d"
SHA1_EMPTY = "da39a3ee5e6b4b0d3255bfef95601890afd80709"


def test_sha1_vectors():
    assert hash_data(b"abc", CLASSIC).hex() == SHA1_ABC
    assert hash_data(b"", CLASSIC).hex() == SHA1_EMPTY


def test_hash_deterministic():
    data = b"same input, same digest"
    assert hash_data(data, CLASSIC) == hash_data(data, CLASSIC)
    assert hash_data(data, MODERN) == hash_data(data, MODERN)
    assert hash_data(data, CLASSIC) != hash_data(data + b"x", CLASSIC)


def test_unknown_suite_ids_rejected():
    with pytest.raises(UnknownAlgorithm):
        AlgorithmSuite("bad", "md5", "dsa-1024", "tripledes-cbc", "rsa-2048-oaep-sha1")
    with pytest.raises(UnknownAlgorithm):
        AlgorithmSuite("bad", "sha1", "rsa-sig", "tripledes-cbc", "rsa-2048-oaep-sha1")


def test_sign_verify_round_trip(alice, bob):
    digest = hash_data(b"payload", CLASSIC)
    sig = sign(alice.signing.private, digest)
    assert verify(alice.signing.public, digest, sig)
    assert not verify(bob.signing.public, digest, sig)


def test_signature_verifies_under_independent_dsa_math(alice):
    digest = hash_data(b"independent check", CLASSIC)
    sig = sign(alice.signing.private, digest)
    assert dsa_verify_ref(alice.signing.public.impl(), digest.data, sig.data)


def test_verify_rejects_flipped_digest_bit(alice):
    digest = hash_data(b"payload", CLASSIC)
    sig = sign(alice.signing.private, digest)
    flipped = Digest(digest.algorithm, digest.data[:-1] + bytes([digest.data[-1] ^ 1]))
    assert not verify(alice.signing.public, flipped, sig)


def test_verify_rejects_truncated_signature(alice):
    digest = hash_data(b"payload", CLASSIC)
    sig = sign(alice.signing.private, digest)
    from epgp.crypto import Signature

    assert not verify(alice.signing.public, digest, Signature(sig.algorithm, sig.signer, sig.data[:-3]))


def test_sign_with_encryption_key_rejected(alice):
    digest = hash_data(b"x", CLASSIC)
    with pytest.raises(WrongKeyRole):
        sign(alice.encryption.private, digest)


def test_sym_round_trip_sizes():
    rng = random.Random(1)
    key = generate_session_key(CLASSIC)
    for size in (0, 1, 7, 8, 9, 4096, 65536):
        data = rng.randbytes(size)
        assert sym_decrypt(key, sym_encrypt(key, data)) == data


def test_sym_fresh_iv_randomizes():
    key = generate_session_key(CLASSIC)
    assert sym_encrypt(key, b"same plaintext") != sym_encrypt(key, b"same plaintext")


def test_sym_ciphertext_length_formula():
    # 8-byte IV + PKCS7 always pads into the next full block
    key = generate_session_key(CLASSIC)
    for size in (0, 1, 7, 8, 9, 100):
        assert len(sym_encrypt(key, b"x" * size)) == 8 * ((size // 8) + 1) + 8


def test_sym_wrong_key_fails():
    a, b = generate_session_key(CLASSIC), generate_session_key(CLASSIC)
    blob = sym_encrypt(a, b"plaintext worth protecting")
    with pytest.raises(BadPadding):
        sym_decrypt(b, blob)


def test_sym_too_short_rejected():
    key = generate_session_key(CLASSIC)
    with pytest.raises(BadPadding):
        sym_decrypt(key, b"\x00" * 9)


def test_session_key_sizes_and_uniqueness():
    assert len(generate_session_key(CLASSIC).secret) == 24
    assert len(generate_session_key(MODERN).secret) == 16
    assert generate_session_key(CLASSIC) != generate_session_key(CLASSIC)


def test_session_key_repr_hides_secret():
    key = generate_session_key(CLASSIC)
    assert key.secret.hex() not in repr(key)


def test_private_key_repr_hides_der(alice):
    assert alice.signing.private.der.hex() not in repr(alice.signing.private)


def test_wrap_round_trip(alice, bob):
    ks = generate_session_key(CLASSIC)
    wrapped = wrap_key(bob.encryption.public, ks)
    assert len(wrapped) == 256  # 2048-bit modulus
    assert unwrap_key(bob.encryption.private, wrapped, CLASSIC) == ks
    with pytest.raises(UnwrapFailure):
        unwrap_key(alice.encryption.private, wrapped, CLASSIC)


def test_wrap_role_checks(alice):
    ks = generate_session_key(CLASSIC)
    with pytest.raises(WrongKeyRole):
        wrap_key(alice.signing.public, ks)
    with pytest.raises(WrongKeyRole):
        unwrap_key(alice.signing.private, b"\x00" * 256, CLASSIC)


def test_seal_direct_and_hybrid(alice, bob):
    small = b"fits directly"
    big = random.Random(2).randbytes(4000)  # beyond OAEP capacity
    for payload in (small, big):
        blob = seal(bob.encryption.public, payload, CLASSIC)
        assert unseal(bob.encryption.private, blob, CLASSIC) == payload
        with pytest.raises(UnsealFailure):
            unseal(alice.encryption.private, blob, CLASSIC)


def test_unseal_rejects_corrupt_blob(bob):
    blob = bytearray(seal(bob.encryption.public, b"payload", CLASSIC))
    blob[-1] ^= 0x40
    with pytest.raises(UnsealFailure):
        unseal(bob.encryption.private, bytes(blob), CLASSIC)


def test_entropy_injection_is_deterministic():
    taken = []

    def entropy(n: int) -> bytes:
        taken.append(n)
        return bytes(range(n))

    key = generate_session_key(CLASSIC, entropy)
    assert key.secret == bytes(range(24))
    blob = sym_encrypt(key, b"payload", entropy)
    assert blob[:8] == bytes(range(8))
    assert taken == [24, 8]


@pytest.mark.parametrize("suite_name", ["classic", "modern"])
def test_suite_round_trip_properties(suite_name, classic_keys, modern_keys):
    """Randomized round-trips for every registered suite (1000 cases each)."""
    suite = CLASSIC if suite_name == "classic" else MODERN
    keys = classic_keys if suite_name == "classic" else modern_keys
    signer = keys["alice@unit.test"]
    recipient = keys["bob@unit.test"]
    rng = random.Random(99)

    key = generate_session_key(suite, rng.randbytes)
    for _ in range(1000):
        data = rng.randbytes(rng.randrange(0, 256))
        assert sym_decrypt(key, sym_encrypt(key, data, rng.randbytes)) == data

    for _ in range(1000):
        digest = hash_data(rng.randbytes(rng.randrange(0, 64)), suite)
        assert verify(signer.signing.public, digest, sign(signer.signing.private, digest))

    for _ in range(1000):
        ks = generate_session_key(suite, rng.randbytes)
        wrapped = wrap_key(recipient.encryption.public, ks)
        assert unwrap_key(recipient.encryption.private, wrapped, suite) == ks


def test_signature_non_malleability(alice):
    """Any byte perturbation of sig or digest fails in >=999/1000 trials."""
    rng = random.Random(123)
    digest = hash_data(b"the signed statement", CLASSIC)
    sig = sign(alice.signing.private, digest)
    from epgp.crypto import Signature

    failures = 0
    trials = 1000
    for _ in range(trials):
        if rng.random() < 0.5:
            raw = bytearray(sig.data)
            raw[rng.randrange(len(raw))] ^= rng.randrange(1, 256)
            ok = verify(alice.signing.public, digest, Signature(sig.algorithm, sig.signer, bytes(raw)))
        else:
            raw = bytearray(digest.data)
            raw[rng.randrange(len(raw))] ^= rng.randrange(1, 256)
            ok = verify(alice.signing.public, Digest(digest.algorithm, bytes(raw)), sig)
        if not ok:
            failures += 1
    assert failures >= 999


def test_generated_pairs_work():
    pair = generate_keypair("fresh@unit.test", KeyRole.SIGNING, CLASSIC)
    digest = hash_data(b"fresh pair", CLASSIC)
    assert verify(pair.public, digest, sign(pair.private, digest))


def test_key_serialization_round_trip(alice):
    from epgp.crypto import KeyMaterial, PrivateKey, PublicKey

    pub = PublicKey.from_bytes(alice.signing.public.to_bytes())
    assert pub == alice.signing.public
    priv = PrivateKey.from_bytes(alice.signing.private.to_bytes())
    assert priv == alice.signing.private
    material = KeyMaterial.from_bytes(alice.to_bytes())
    assert material.owner == alice.owner
    assert material.signing.public == alice.signing.public
    assert material.encryption.private == alice.encryption.private
