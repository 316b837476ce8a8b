"""Sealing and opening: the full pipeline plus receipt round-trips."""

import random

import pytest

from epgp.codec import radix64_decode, unframe
from epgp.crypto import CLASSIC, MODERN, hash_data, unseal, verify
from epgp.errors import (
    DecompressFailed,
    DecryptFailed,
    EvidenceInvalid,
    KeyUnwrapFailed,
    MessageTooLarge,
    OriginCheckFailed,
    WrongKeyRole,
)
from epgp.model import EvidenceKind, PlaintextMessage, canonical_bytes
from epgp.receiver import issue_receipt, open_message, open_message_parts, verify_origin
from epgp.sender import compose_and_seal, compose_stages, verify_receipt
from epgp.tags import Tag

from conftest import ALICE, BOB


def make_msg(body: bytes, subject: str = "test subject") -> PlaintextMessage:
    return PlaintextMessage(ALICE, BOB, subject, 1_700_000_123, body)


@pytest.fixture()
def sealed(alice, bob):
    msg = make_msg(b"pipeline round trip body " * 10)
    env = compose_and_seal(msg, alice, bob.encryption.public, CLASSIC)
    return msg, env


def test_full_round_trip(sealed, alice, bob):
    msg, env = sealed
    opened = open_message(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, CLASSIC)
    assert opened == msg


def test_empty_body_round_trip(alice, bob):
    msg = make_msg(b"")
    env = compose_and_seal(msg, alice, bob.encryption.public, CLASSIC)
    env.validate_structure()
    assert open_message(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, CLASSIC) == msg


def test_modern_suite_round_trip(modern_keys):
    alice = modern_keys[ALICE]
    bob = modern_keys[BOB]
    msg = make_msg(b"modern profile body")
    env = compose_and_seal(msg, alice, bob.encryption.public, MODERN)
    assert open_message(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, MODERN) == msg


def test_random_bodies_round_trip(alice, bob):
    rng = random.Random(17)
    for _ in range(25):
        msg = make_msg(rng.randbytes(rng.randrange(0, 8192)))
        env = compose_and_seal(msg, alice, bob.encryption.public, CLASSIC, entropy=rng.randbytes)
        assert open_message(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, CLASSIC) == msg


def test_stage_order_and_contents(alice, bob):
    """The pipeline runs hash -> sign -> compress -> encrypt -> armor."""
    msg = make_msg(b"staged inspection")
    trace = compose_stages(msg, alice, bob.encryption.public, CLASSIC)

    plain = canonical_bytes(msg)
    assert trace.digest == hash_data(plain, CLASSIC)
    assert verify(alice.signing.public, trace.digest, trace.signature)

    inner = dict(unframe(trace.signed_frame))
    assert inner[Tag.SIG] == trace.signature.data
    assert inner[Tag.MESSAGE] == plain

    from epgp.codec import decompress

    assert decompress(trace.compressed) == trace.signed_frame

    body = dict(unframe(radix64_decode(trace.armored)))
    assert body[Tag.SYM_CT] == trace.ciphertext
    assert trace.envelope.m5_bytes() == trace.armored.to_bytes()


def test_session_key_not_retained(sealed):
    """The one copy of the session key lives in the wrapped field."""
    _, env = sealed
    trace_fields = env.__dict__
    assert "session_key" not in trace_fields
    # the armored body must not embed the wrapped key either
    assert env.wrapped_key not in env.m5_bytes()


def test_message_cap(alice, bob):
    msg = make_msg(b"y" * 2048)
    with pytest.raises(MessageTooLarge):
        compose_and_seal(msg, alice, bob.encryption.public, CLASSIC, message_cap=1024)


def test_wrong_recipient_key_role(alice, bob):
    msg = make_msg(b"x")
    with pytest.raises(WrongKeyRole):
        compose_and_seal(msg, alice, bob.signing.public, CLASSIC)


def test_deterministic_with_injected_entropy(alice, bob):
    # fixed session key, IV, and token: the symmetric stages repeat exactly
    def entropy(n: int) -> bytes:
        return bytes((i * 7 + 3) % 256 for i in range(n))

    msg = make_msg(b"fixed entropy")
    t1 = compose_stages(msg, alice, bob.encryption.public, CLASSIC, entropy=entropy)
    t2 = compose_stages(msg, alice, bob.encryption.public, CLASSIC, entropy=entropy)
    assert t1.compressed != t2.compressed  # signatures are randomized
    assert t1.ciphertext[:8] == t2.ciphertext[:8]  # same injected IV
    assert t1.envelope.upload_token == t2.envelope.upload_token


# --- receipts ----------------------------------------------------------------

def test_receipt_round_trip(sealed, alice, bob):
    msg, env = sealed
    receipt = issue_receipt(env.m5_bytes(), bob, alice.encryption.public, CLASSIC, "000001-ab")
    # server-side check: cleartext signature over the transmission digest
    assert verify(bob.signing.public, hash_data(env.m5_bytes(), CLASSIC), receipt.receipt_sig)
    # sender-side check: the sealed copy decrypts to exactly the signature bytes
    assert unseal(alice.encryption.private, receipt.sealed_for_sender, CLASSIC) == receipt.receipt_sig.data


def test_receipt_requires_no_session_key(sealed, alice, bob):
    # issuing works from the unopened transmission alone
    _, env = sealed
    receipt = issue_receipt(env.m5_bytes(), bob, alice.encryption.public, CLASSIC, "id-1")
    assert receipt.receiver == BOB


def test_verify_receipt_happy_path(sealed, alice, bob):
    msg, env = sealed
    receipt = issue_receipt(env.m5_bytes(), bob, alice.encryption.public, CLASSIC, "000001-ab")
    record = verify_receipt(
        receipt.sealed_for_sender, alice, bob.signing.public, env.m5_bytes(), CLASSIC, "000001-ab",
    )
    assert record.kind is EvidenceKind.NRR
    assert record.digest == hash_data(env.m5_bytes(), CLASSIC)
    assert verify(bob.signing.public, record.digest, record.signature)


def test_verify_receipt_stage_decrypt(sealed, alice, bob, eve):
    msg, env = sealed
    # sealed to the wrong sender: decryption stage fails
    receipt = issue_receipt(env.m5_bytes(), bob, eve.encryption.public, CLASSIC, "id")
    with pytest.raises(EvidenceInvalid) as err:
        verify_receipt(receipt.sealed_for_sender, alice, bob.signing.public, env.m5_bytes(), CLASSIC, "id")
    assert err.value.stage == "decrypt"


def test_verify_receipt_stage_digest(alice, bob):
    # receipt signed over a different transmission: digest stage fails
    env_a = compose_and_seal(make_msg(b"first"), alice, bob.encryption.public, CLASSIC)
    env_b = compose_and_seal(make_msg(b"second"), alice, bob.encryption.public, CLASSIC)
    receipt = issue_receipt(env_b.m5_bytes(), bob, alice.encryption.public, CLASSIC, "id")
    with pytest.raises(EvidenceInvalid) as err:
        verify_receipt(receipt.sealed_for_sender, alice, bob.signing.public, env_a.m5_bytes(), CLASSIC, "id")
    assert err.value.stage == "digest"


def test_verify_receipt_stage_signature(alice, bob):
    from epgp.crypto import seal

    blob = seal(alice.encryption.public, b"not a DER signature", CLASSIC)
    with pytest.raises(EvidenceInvalid) as err:
        verify_receipt(blob, alice, bob.signing.public, b"m5 bytes", CLASSIC, "id")
    assert err.value.stage == "signature"


# --- opening failures ----------------------------------------------------------

def test_open_wrong_unwrap_key(sealed, alice, eve):
    _, env = sealed
    with pytest.raises(KeyUnwrapFailed):
        open_message(env.m5_bytes(), env.wrapped_key, eve, alice.signing.public, CLASSIC)


def test_open_wrong_session_key_blob(sealed, alice, bob):
    msg, env = sealed
    other = compose_and_seal(make_msg(b"other"), alice, bob.encryption.public, CLASSIC)
    with pytest.raises((DecryptFailed, DecompressFailed, OriginCheckFailed)):
        open_message(env.m5_bytes(), other.wrapped_key, bob, alice.signing.public, CLASSIC)


def test_open_impostor_origin(sealed, bob, eve):
    _, env = sealed
    with pytest.raises(OriginCheckFailed):
        open_message(env.m5_bytes(), env.wrapped_key, bob, eve.signing.public, CLASSIC)


def test_forged_envelope_fails_origin_check(alice, bob, eve):
    # sealed by eve but presented as alice
    msg = PlaintextMessage(ALICE, BOB, "fake", 1, b"forged")
    from epgp.crypto import KeyMaterial, KeyPair, KeyRole

    forged = KeyMaterial(
        owner=ALICE,
        signing=KeyPair(eve.signing.public, eve.signing.private, KeyRole.SIGNING, ALICE),
        encryption=alice.encryption,
        suite_id="classic",
    )
    env = compose_and_seal(msg, forged, bob.encryption.public, CLASSIC)
    with pytest.raises(OriginCheckFailed):
        open_message(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, CLASSIC)


def test_single_flip_never_silent(sealed, alice, bob):
    """Quick slice of the tamper property (the full 10k-run lives in acceptance)."""
    msg, env = sealed
    m5 = env.m5_bytes()
    rng = random.Random(5)
    for _ in range(50):
        index = rng.randrange(len(m5))
        tampered = m5[:index] + bytes([m5[index] ^ rng.randrange(1, 256)]) + m5[index + 1:]
        try:
            open_message(tampered, env.wrapped_key, bob, alice.signing.public, CLASSIC)
        except Exception as err:  # noqa: BLE001 — any failure must carry a stage
            assert hasattr(err, "stage"), f"unlabeled failure: {err!r}"
        else:
            pytest.fail(f"flip at {index} opened silently")


def test_verify_origin_record(sealed, alice, bob):
    msg, env = sealed
    opened, sig = open_message_parts(env.m5_bytes(), env.wrapped_key, bob, alice.signing.public, CLASSIC)
    record = verify_origin(opened, sig, alice.signing.public, CLASSIC, message_id="id-9")
    assert record.kind is EvidenceKind.NRO
    assert record.sender == ALICE

    altered = PlaintextMessage(opened.sender, opened.recipient, opened.subject, opened.date, opened.body + b"!")
    with pytest.raises(EvidenceInvalid):
        verify_origin(altered, sig, alice.signing.public, CLASSIC)
