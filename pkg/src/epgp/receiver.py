"""Receiving side: issue receipts over sealed messages, open them after
key release, and verify origin.

A receipt is issued over the unopened transmission bytes — issuance takes
no session-key material at all, which is what lets the server trade the
key for it. Opening inverts the sealing pipeline stage by stage; every
failure names the stage that rejected the input, and the final origin
signature check is the integrity gate (the signed digest is the only
trustworthy carrier of the original message hash).
"""

from __future__ import annotations

import os
import threading
import time

from .codec import decompress, radix64_decode, unframe, frame, iter_frames
from .crypto import (
    AlgorithmSuite,
    Entropy,
    KeyMaterial,
    PublicKey,
    Signature,
    hash_data,
    seal,
    sign,
    sym_decrypt,
    unwrap_key,
    verify,
)
from .errors import (
    BadPadding,
    CorruptStream,
    DecompressFailed,
    DecryptFailed,
    EvidenceInvalid,
    FrameError,
    KeyUnwrapFailed,
    OriginCheckFailed,
    UnwrapFailure,
)
from .model import (
    EvidenceKind,
    EvidenceRecord,
    MESSAGE_ARMOR_LABEL,
    PlaintextMessage,
    Receipt,
    canonical_bytes,
    parse_message,
)
from .tags import Tag

# decompressed frames may exceed the raw cap by framing overhead only
_DECOMPRESS_SLACK = 64 * 1024


def issue_receipt(
    m5_bytes: bytes,
    receiver_keys: KeyMaterial,
    sender_encryption_pub: PublicKey,
    suite: AlgorithmSuite,
    message_id: str,
    issued_at: int | None = None,
    entropy: Entropy | None = None,
) -> Receipt:
    """Sign the unopened transmission and seal the signature for the sender."""
    if not m5_bytes:
        raise ValueError("cannot issue a receipt over empty transmission bytes")
    receipt_sig = sign(receiver_keys.signing.private, hash_data(m5_bytes, suite))
    sealed = seal(sender_encryption_pub, receipt_sig.data, suite, entropy)
    return Receipt(
        message_id=message_id,
        receiver=receiver_keys.owner,
        receipt_sig=receipt_sig,
        sealed_for_sender=sealed,
        issued_at=int(time.time()) if issued_at is None else issued_at,
    )


def open_message_parts(
    m5_bytes: bytes,
    wrapped_key: bytes,
    receiver_keys: KeyMaterial,
    sender_signing_pub: PublicKey,
    suite: AlgorithmSuite,
    message_cap: int | None = None,
) -> tuple[PlaintextMessage, Signature]:
    """Invert the sealing pipeline; returns the message and origin signature.

    Raises MalformedArmor, FrameError, KeyUnwrapFailed, DecryptFailed,
    DecompressFailed, or OriginCheckFailed — one per pipeline stage, never
    a silent wrong answer.
    """
    body = radix64_decode(m5_bytes, expected_label=MESSAGE_ARMOR_LABEL)
    parts = dict(unframe(body))
    if set(parts) != {Tag.SYM_CT}:
        raise FrameError("transmission frame must contain exactly one ciphertext part")

    try:
        session_key = unwrap_key(receiver_keys.encryption.private, wrapped_key, suite)
    except UnwrapFailure as exc:
        raise KeyUnwrapFailed(str(exc)) from None

    try:
        compressed = sym_decrypt(session_key, parts[Tag.SYM_CT])
    except BadPadding as exc:
        raise DecryptFailed(str(exc)) from None

    max_out = None if message_cap is None else message_cap + _DECOMPRESS_SLACK
    try:
        signed_frame = decompress(compressed, max_output=max_out)
    except CorruptStream as exc:
        raise DecompressFailed(str(exc)) from None

    inner = dict(unframe(signed_frame))
    if set(inner) != {Tag.SIG, Tag.MESSAGE}:
        raise FrameError("signed frame must contain exactly signature and message parts")
    plain = inner[Tag.MESSAGE]
    signature = Signature(
        algorithm=sender_signing_pub.algorithm,
        signer=sender_signing_pub.owner,
        data=inner[Tag.SIG],
    )
    if not verify(sender_signing_pub, hash_data(plain, suite), signature):
        raise OriginCheckFailed("origin signature over the recovered message is invalid")
    return parse_message(plain), signature


def open_message(
    m5_bytes: bytes,
    wrapped_key: bytes,
    receiver_keys: KeyMaterial,
    sender_signing_pub: PublicKey,
    suite: AlgorithmSuite,
    message_cap: int | None = None,
) -> PlaintextMessage:
    """Recover the original message from a sealed transmission."""
    msg, _ = open_message_parts(
        m5_bytes, wrapped_key, receiver_keys, sender_signing_pub, suite, message_cap,
    )
    return msg


def verify_origin(
    msg: PlaintextMessage,
    signature: Signature,
    sender_signing_pub: PublicKey,
    suite: AlgorithmSuite,
    message_id: str = "",
    recorded_at: int | None = None,
) -> EvidenceRecord:
    """Turn a verified origin signature into a standalone NRO record."""
    digest = hash_data(canonical_bytes(msg), suite)
    if not verify(sender_signing_pub, digest, signature):
        raise EvidenceInvalid("digest", "origin signature does not bind to this message")
    return EvidenceRecord(
        kind=EvidenceKind.NRO,
        message_id=message_id,
        sender=sender_signing_pub.owner,
        receiver=msg.recipient,
        digest=digest,
        signature=signature,
        recorded_at=int(time.time()) if recorded_at is None else recorded_at,
    )


class ReceiverStore:
    """Local cache making `read` idempotent: opened messages, issued
    receipts, and locally deleted ids."""

    def __init__(self, path: str) -> None:
        self._path = path
        self._lock = threading.Lock()
        self._opened: dict[str, bytes] = {}       # message_id -> canonical bytes
        self._receipts: dict[str, bytes] = {}     # message_id -> receipt bytes
        self._deleted: set[str] = set()
        self._load()

    _KIND_OPENED = b"opened"
    _KIND_RECEIPT = b"receipt"
    _KIND_DELETED = b"deleted"

    def _load(self) -> None:
        if not os.path.exists(self._path):
            return
        with open(self._path, "rb") as fh:
            data = fh.read()
        for parts in iter_frames(data):
            record = dict(parts)
            kind = record[Tag.ENTRY_KIND]
            message_id = record[Tag.MESSAGE_ID].decode()
            if kind == self._KIND_OPENED:
                self._opened[message_id] = record[Tag.MESSAGE]
            elif kind == self._KIND_RECEIPT:
                self._receipts[message_id] = record[Tag.RECEIPT_BLOB]
            elif kind == self._KIND_DELETED:
                self._deleted.add(message_id)

    def _append(self, parts: list[tuple[int, bytes]]) -> None:
        os.makedirs(os.path.dirname(self._path) or ".", exist_ok=True)
        with open(self._path, "ab") as fh:
            fh.write(frame(parts))
            fh.flush()

    def record_opened(self, message_id: str, msg: PlaintextMessage) -> None:
        with self._lock:
            self._append([
                (Tag.ENTRY_KIND, self._KIND_OPENED),
                (Tag.MESSAGE_ID, message_id.encode()),
                (Tag.MESSAGE, canonical_bytes(msg)),
            ])
            self._opened[message_id] = canonical_bytes(msg)

    def record_receipt(self, receipt: Receipt) -> None:
        with self._lock:
            self._append([
                (Tag.ENTRY_KIND, self._KIND_RECEIPT),
                (Tag.MESSAGE_ID, receipt.message_id.encode()),
                (Tag.RECEIPT_BLOB, receipt.to_bytes()),
            ])
            self._receipts[receipt.message_id] = receipt.to_bytes()

    def mark_deleted(self, message_id: str) -> None:
        with self._lock:
            self._append([
                (Tag.ENTRY_KIND, self._KIND_DELETED),
                (Tag.MESSAGE_ID, message_id.encode()),
            ])
            self._deleted.add(message_id)

    def opened(self, message_id: str) -> PlaintextMessage | None:
        with self._lock:
            data = self._opened.get(message_id)
        return parse_message(data) if data is not None else None

    def receipt(self, message_id: str) -> Receipt | None:
        with self._lock:
            data = self._receipts.get(message_id)
        return Receipt.from_bytes(data) if data is not None else None

    def is_deleted(self, message_id: str) -> bool:
        with self._lock:
            return message_id in self._deleted
