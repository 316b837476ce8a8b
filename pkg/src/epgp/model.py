"""Domain types for every protocol artifact and the envelopes that carry them.

All values are immutable and serialize through codec framing under the
Tag registry, so hashing and storage are deterministic across runs and
platforms.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from enum import Enum

from .codec import ArmoredText, frame, radix64_decode, unframe, unframe_map
from .crypto import Digest, Signature
from .errors import FrameError
from .tags import Tag

MESSAGE_ARMOR_LABEL = "EPGP MESSAGE"

_U64 = struct.Struct(">Q")


def _pack_time(value: int) -> bytes:
    return _U64.pack(value)


def _unpack_time(data: bytes) -> int:
    if len(data) != _U64.size:
        raise FrameError(f"timestamp field must be {_U64.size} bytes")
    return _U64.unpack(data)[0]


@dataclass(frozen=True)
class PlaintextMessage:
    """The original mail: routing headers plus an opaque body."""

    sender: str
    recipient: str
    subject: str
    date: int  # UTC seconds
    body: bytes

    def __post_init__(self) -> None:
        if not self.sender:
            raise ValueError("message sender must be non-empty")
        if not self.recipient:
            raise ValueError("message recipient must be non-empty")
        if self.date < 0:
            raise ValueError("message date must be non-negative")


def canonical_bytes(msg: PlaintextMessage) -> bytes:
    """Stable injective serialization of a message (the hashing target)."""
    header = frame([
        (Tag.FROM, msg.sender.encode()),
        (Tag.TO, msg.recipient.encode()),
        (Tag.SUBJECT, msg.subject.encode()),
        (Tag.DATE, _pack_time(msg.date)),
    ])
    return frame([(Tag.MSG_HDR, header), (Tag.BODY, msg.body)])


def parse_message(data: bytes) -> PlaintextMessage:
    """Inverse of canonical_bytes; raises FrameError on structural problems."""
    outer = unframe_map(data, required=(Tag.MSG_HDR, Tag.BODY))
    if len(outer) != 2:
        raise FrameError("canonical message frame has extra parts")
    header = unframe_map(outer[Tag.MSG_HDR], required=(Tag.FROM, Tag.TO, Tag.SUBJECT, Tag.DATE))
    if len(header) != 4:
        raise FrameError("canonical header frame has extra parts")
    return PlaintextMessage(
        sender=header[Tag.FROM].decode(),
        recipient=header[Tag.TO].decode(),
        subject=header[Tag.SUBJECT].decode(),
        date=_unpack_time(header[Tag.DATE]),
        body=outer[Tag.BODY],
    )


def _signature_parts(sig: Signature) -> list[tuple[int, bytes]]:
    return [
        (Tag.SIG_ALG, sig.algorithm.encode()),
        (Tag.SIGNER, sig.signer.encode()),
        (Tag.SIG, sig.data),
    ]


def _signature_from(parts: dict[int, bytes]) -> Signature:
    return Signature(
        algorithm=parts[Tag.SIG_ALG].decode(),
        signer=parts[Tag.SIGNER].decode(),
        data=parts[Tag.SIG],
    )


@dataclass(frozen=True)
class TransmissionEnvelope:
    """The unit stored by the delivery server: armored sealed message plus
    the wrapped session key and routing metadata.

    subject/date ride in cleartext so the server can render inbox previews;
    the authoritative copies are sealed inside the armored body.
    """

    sender: str
    recipient: str
    suite_id: str
    subject: str
    date: int
    armored_body: ArmoredText
    wrapped_key: bytes
    upload_token: str
    message_id: str | None = None
    upload_time: int | None = None

    def __post_init__(self) -> None:
        if not self.wrapped_key:
            raise ValueError("wrapped_key must be non-empty")

    def m5_bytes(self) -> bytes:
        """The exact bytes the receipt signature covers."""
        return self.armored_body.to_bytes()

    def validate_structure(self) -> None:
        """Check the armored body decodes to exactly one ciphertext part."""
        parts = unframe(radix64_decode(self.armored_body, expected_label=MESSAGE_ARMOR_LABEL))
        if len(parts) != 1 or parts[0][0] != Tag.SYM_CT:
            raise FrameError("armored body must contain exactly one SYM_CT part")

    def assigned(self, message_id: str, upload_time: int) -> "TransmissionEnvelope":
        return replace(self, message_id=message_id, upload_time=upload_time)

    def to_bytes(self) -> bytes:
        parts = [
            (Tag.SENDER, self.sender.encode()),
            (Tag.RECIPIENT, self.recipient.encode()),
            (Tag.SUITE_ID, self.suite_id.encode()),
            (Tag.SUBJECT, self.subject.encode()),
            (Tag.DATE, _pack_time(self.date)),
            (Tag.MESSAGE, self.m5_bytes()),
            (Tag.WRAPPED_KEY, self.wrapped_key),
            (Tag.UPLOAD_TOKEN, self.upload_token.encode()),
        ]
        if self.message_id is not None:
            parts.append((Tag.MESSAGE_ID, self.message_id.encode()))
        if self.upload_time is not None:
            parts.append((Tag.UPLOAD_TIME, _pack_time(self.upload_time)))
        return frame(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TransmissionEnvelope":
        parts = unframe_map(data, required=(
            Tag.SENDER, Tag.RECIPIENT, Tag.SUITE_ID, Tag.SUBJECT, Tag.DATE,
            Tag.MESSAGE, Tag.WRAPPED_KEY, Tag.UPLOAD_TOKEN,
        ))
        return cls(
            sender=parts[Tag.SENDER].decode(),
            recipient=parts[Tag.RECIPIENT].decode(),
            suite_id=parts[Tag.SUITE_ID].decode(),
            subject=parts[Tag.SUBJECT].decode(),
            date=_unpack_time(parts[Tag.DATE]),
            armored_body=ArmoredText.from_text(parts[Tag.MESSAGE]),
            wrapped_key=parts[Tag.WRAPPED_KEY],
            upload_token=parts[Tag.UPLOAD_TOKEN].decode(),
            message_id=parts[Tag.MESSAGE_ID].decode() if Tag.MESSAGE_ID in parts else None,
            upload_time=_unpack_time(parts[Tag.UPLOAD_TIME]) if Tag.UPLOAD_TIME in parts else None,
        )


@dataclass(frozen=True)
class Receipt:
    """The receiver's signature over the still-sealed message.

    receipt_sig is cleartext so the server can verify it before releasing
    the key; sealed_for_sender is the same signature encrypted to the
    sender, and must decrypt to exactly receipt_sig's bytes.
    """

    message_id: str
    receiver: str
    receipt_sig: Signature
    sealed_for_sender: bytes
    issued_at: int

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.MESSAGE_ID, self.message_id.encode()),
            (Tag.RECIPIENT, self.receiver.encode()),
            *_signature_parts(self.receipt_sig),
            (Tag.SEALED_RCPT, self.sealed_for_sender),
            (Tag.ISSUED_AT, _pack_time(self.issued_at)),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Receipt":
        parts = unframe_map(data, required=(
            Tag.MESSAGE_ID, Tag.RECIPIENT, Tag.SIG_ALG, Tag.SIGNER, Tag.SIG,
            Tag.SEALED_RCPT, Tag.ISSUED_AT,
        ))
        return cls(
            message_id=parts[Tag.MESSAGE_ID].decode(),
            receiver=parts[Tag.RECIPIENT].decode(),
            receipt_sig=_signature_from(parts),
            sealed_for_sender=parts[Tag.SEALED_RCPT],
            issued_at=_unpack_time(parts[Tag.ISSUED_AT]),
        )


class EvidenceKind(Enum):
    NRO = "NRO"
    NRR = "NRR"


@dataclass(frozen=True)
class EvidenceRecord:
    """A self-contained non-repudiation proof.

    The digest and signature fields are the exact bytes verified; a record
    re-verifies from these plus the signer's public key, with no other
    state. NRR records bind the receiver to the sealed transmission; NRO
    records bind the sender to the recovered message.
    """

    kind: EvidenceKind
    message_id: str
    sender: str
    receiver: str
    digest: Digest
    signature: Signature
    recorded_at: int

    @property
    def signer(self) -> str:
        return self.receiver if self.kind is EvidenceKind.NRR else self.sender

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.EV_KIND, self.kind.value.encode()),
            (Tag.MESSAGE_ID, self.message_id.encode()),
            (Tag.SENDER, self.sender.encode()),
            (Tag.RECIPIENT, self.receiver.encode()),
            (Tag.EV_DIGEST_ALG, self.digest.algorithm.encode()),
            (Tag.EV_DIGEST, self.digest.data),
            *_signature_parts(self.signature),
            (Tag.RECORDED_AT, _pack_time(self.recorded_at)),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "EvidenceRecord":
        parts = unframe_map(data, required=(
            Tag.EV_KIND, Tag.MESSAGE_ID, Tag.SENDER, Tag.RECIPIENT,
            Tag.EV_DIGEST_ALG, Tag.EV_DIGEST, Tag.SIG_ALG, Tag.SIGNER, Tag.SIG,
            Tag.RECORDED_AT,
        ))
        return cls(
            kind=EvidenceKind(parts[Tag.EV_KIND].decode()),
            message_id=parts[Tag.MESSAGE_ID].decode(),
            sender=parts[Tag.SENDER].decode(),
            receiver=parts[Tag.RECIPIENT].decode(),
            digest=Digest(algorithm=parts[Tag.EV_DIGEST_ALG].decode(), data=parts[Tag.EV_DIGEST]),
            signature=_signature_from(parts),
            recorded_at=_unpack_time(parts[Tag.RECORDED_AT]),
        )


@dataclass(frozen=True)
class InboxEntry:
    """One line of an inbox preview; never includes body bytes."""

    message_id: str
    sender: str
    subject: str
    date: int
    opened: bool

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.MESSAGE_ID, self.message_id.encode()),
            (Tag.SENDER, self.sender.encode()),
            (Tag.SUBJECT, self.subject.encode()),
            (Tag.DATE, _pack_time(self.date)),
            (Tag.OPENED, b"\x01" if self.opened else b"\x00"),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "InboxEntry":
        parts = unframe_map(data, required=(
            Tag.MESSAGE_ID, Tag.SENDER, Tag.SUBJECT, Tag.DATE, Tag.OPENED,
        ))
        return cls(
            message_id=parts[Tag.MESSAGE_ID].decode(),
            sender=parts[Tag.SENDER].decode(),
            subject=parts[Tag.SUBJECT].decode(),
            date=_unpack_time(parts[Tag.DATE]),
            opened=parts[Tag.OPENED] == b"\x01",
        )


@dataclass(frozen=True)
class EvidenceItem:
    """A sealed receipt awaiting pickup by its sender."""

    message_id: str
    sealed_receipt: bytes
    forwarded_at: int

    def to_bytes(self) -> bytes:
        return frame([
            (Tag.MESSAGE_ID, self.message_id.encode()),
            (Tag.SEALED_RCPT, self.sealed_receipt),
            (Tag.FORWARDED_AT, _pack_time(self.forwarded_at)),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "EvidenceItem":
        parts = unframe_map(data, required=(Tag.MESSAGE_ID, Tag.SEALED_RCPT, Tag.FORWARDED_AT))
        return cls(
            message_id=parts[Tag.MESSAGE_ID].decode(),
            sealed_receipt=parts[Tag.SEALED_RCPT],
            forwarded_at=_unpack_time(parts[Tag.FORWARDED_AT]),
        )
