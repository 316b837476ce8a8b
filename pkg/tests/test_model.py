import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgp.codec import frame, radix64_encode
from epgp.errors import FrameError
from epgp.model import (
    EvidenceItem,
    EvidenceKind,
    EvidenceRecord,
    InboxEntry,
    PlaintextMessage,
    Receipt,
    TransmissionEnvelope,
    canonical_bytes,
    parse_message,
)
from epgp.crypto import Digest, Signature
from epgp.tags import Tag


def msg(**overrides):
    base = dict(
        sender="a@x.test",
        recipient="b@x.test",
        subject="subject line",
        date=1_700_000_000,
        body=b"body bytes",
    )
    base.update(overrides)
    return PlaintextMessage(**base)


def test_distinct_subjects_distinct_bytes():
    assert canonical_bytes(msg(subject="one")) != canonical_bytes(msg(subject="two"))


def test_serialization_is_stable():
    assert canonical_bytes(msg()) == canonical_bytes(msg())


def test_empty_body_is_valid():
    m = msg(body=b"")
    assert parse_message(canonical_bytes(m)) == m


def test_empty_principals_rejected():
    with pytest.raises(ValueError):
        msg(sender="")
    with pytest.raises(ValueError):
        msg(recipient="")


message_strategy = st.builds(
    PlaintextMessage,
    sender=st.text(min_size=1, max_size=30).filter(lambda s: s != ""),
    recipient=st.text(min_size=1, max_size=30),
    subject=st.text(max_size=60),
    date=st.integers(min_value=0, max_value=2**40),
    body=st.binary(max_size=2000),
)


@given(message_strategy)
@settings(max_examples=300, deadline=None)
def test_canonical_bijection(m):
    assert parse_message(canonical_bytes(m)) == m


@given(message_strategy, message_strategy)
@settings(max_examples=200, deadline=None)
def test_canonical_injective(a, b):
    if a != b:
        assert canonical_bytes(a) != canonical_bytes(b)


def _envelope(**overrides):
    body = radix64_encode(frame([(Tag.SYM_CT, b"\x01" * 24)]))
    base = dict(
        sender="a@x.test",
        recipient="b@x.test",
        suite_id="classic",
        subject="s",
        date=1,
        armored_body=body,
        wrapped_key=b"\x02" * 256,
        upload_token="tok123",
    )
    base.update(overrides)
    return TransmissionEnvelope(**base)


def test_envelope_round_trip():
    env = _envelope()
    env.validate_structure()
    parsed = TransmissionEnvelope.from_bytes(env.to_bytes())
    assert parsed == env
    assigned = env.assigned("000001-abcd", 12345)
    parsed = TransmissionEnvelope.from_bytes(assigned.to_bytes())
    assert parsed.message_id == "000001-abcd"
    assert parsed.upload_time == 12345


def test_envelope_structure_validation():
    bad = _envelope(armored_body=radix64_encode(frame([(Tag.BODY, b"zz")])))
    with pytest.raises(FrameError):
        bad.validate_structure()
    two_parts = _envelope(
        armored_body=radix64_encode(frame([(Tag.SYM_CT, b"x"), (Tag.BODY, b"y")]))
    )
    with pytest.raises(FrameError):
        two_parts.validate_structure()


def test_envelope_requires_wrapped_key():
    with pytest.raises(ValueError):
        _envelope(wrapped_key=b"")


def test_receipt_round_trip():
    receipt = Receipt(
        message_id="000007-beef",
        receiver="b@x.test",
        receipt_sig=Signature("dsa-1024", "b@x.test", b"\x30\x06\x02\x01\x01\x02\x01\x01"),
        sealed_for_sender=b"\x05" * 64,
        issued_at=99,
    )
    assert Receipt.from_bytes(receipt.to_bytes()) == receipt


def test_evidence_record_round_trip():
    record = EvidenceRecord(
        kind=EvidenceKind.NRR,
        message_id="000007-beef",
        sender="a@x.test",
        receiver="b@x.test",
        digest=Digest("sha1", b"\x0a" * 20),
        signature=Signature("dsa-1024", "b@x.test", b"\x30\x00"),
        recorded_at=7,
    )
    parsed = EvidenceRecord.from_bytes(record.to_bytes())
    assert parsed == record
    assert parsed.signer == "b@x.test"
    nro = EvidenceRecord.from_bytes(
        record.to_bytes().replace(b"NRR", b"NRO")
    )
    assert nro.signer == "a@x.test"


def test_inbox_entry_and_evidence_item_round_trip():
    entry = InboxEntry("000001-aa", "a@x.test", "subject", 55, True)
    assert InboxEntry.from_bytes(entry.to_bytes()) == entry
    item = EvidenceItem("000001-aa", b"\x09" * 32, 66)
    assert EvidenceItem.from_bytes(item.to_bytes()) == item
