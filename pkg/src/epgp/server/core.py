"""Trusted delivery server: mailbox store, session-key escrow, receipt
validation, key release, and evidence forwarding.

The exchange at the center of the protocol: the wrapped session key stays
HELD until the addressee hands over a signature on the exact stored
transmission bytes. Verification happens before any state changes; release
then writes the evidence record first, the forwarded receipt second, and
flips escrow last, each synced — so in every crash prefix a released key
implies a logged, verifiable receipt. The server never sees the session
key itself, only the recipient-wrapped blob.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from ..crypto import KeyRole, Signature, get_suite, hash_data, verify
from ..directory import Directory, normalize_email
from ..errors import (
    AlreadyReleased,
    DuplicateUpload,
    NotAddressee,
    NotFound,
    ReceiptInvalid,
    UnknownPrincipal,
)
from ..model import (
    EvidenceItem,
    EvidenceKind,
    EvidenceRecord,
    InboxEntry,
    Receipt,
    TransmissionEnvelope,
)
from ..codec import frame, unframe_map
from ..tags import Tag
from .storage import Storage


class EscrowState(Enum):
    HELD = "HELD"
    RELEASED = "RELEASED"


@dataclass(frozen=True)
class EscrowEntry:
    """Withheld wrapped key for one message; transitions HELD->RELEASED once."""

    message_id: str
    wrapped_key: bytes
    state: EscrowState
    released_at: int | None = None
    receipt_blob: bytes | None = None  # the exact receipt that released the key

    def to_bytes(self) -> bytes:
        parts = [
            (Tag.MESSAGE_ID, self.message_id.encode()),
            (Tag.WRAPPED_KEY, self.wrapped_key),
            (Tag.ESCROW_STATE, self.state.value.encode()),
        ]
        if self.released_at is not None:
            parts.append((Tag.RELEASED_AT, self.released_at.to_bytes(8, "big")))
        if self.receipt_blob is not None:
            parts.append((Tag.RECEIPT_BLOB, self.receipt_blob))
        return frame(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "EscrowEntry":
        parts = unframe_map(data, required=(Tag.MESSAGE_ID, Tag.WRAPPED_KEY, Tag.ESCROW_STATE))
        released_at = parts.get(Tag.RELEASED_AT)
        return cls(
            message_id=parts[Tag.MESSAGE_ID].decode(),
            wrapped_key=parts[Tag.WRAPPED_KEY],
            state=EscrowState(parts[Tag.ESCROW_STATE].decode()),
            released_at=int.from_bytes(released_at, "big") if released_at is not None else None,
            receipt_blob=parts.get(Tag.RECEIPT_BLOB),
        )


_ACK_MARKER = b"ack"
_ITEM_MARKER = b"item"


class DeliveryServer:
    """Always-online delivery party: stores sealed mail, escrows wrapped
    keys, trades them for receipts, and forwards evidence."""

    def __init__(
        self,
        storage: Storage,
        directory: Directory,
        clock: Callable[[], float] = time.time,
        rng_bytes: Callable[[int], bytes] = secrets.token_bytes,
    ) -> None:
        self._storage = storage
        self._directory = directory
        self._clock = clock
        self._rng_bytes = rng_bytes
        self._lock = threading.Lock()
        self._message_locks: dict[str, threading.Lock] = {}
        # read caches over the append-only stores, rebuilt on start
        self._upload_tokens: dict[str, str] = {}          # upload token -> message id
        self._envelopes: dict[str, bytes] = {}            # message id -> envelope record
        self._mailbox_ids: dict[str, list[str]] = {}      # recipient -> message ids
        self._evidence_ids: set[str] = set()
        self._forwarded: set[tuple[str, str]] = set()     # (sender, message id)
        self._rebuild_index()

    def _rebuild_index(self) -> None:
        for user in self._storage.mailbox_users():
            for record in self._storage.mailbox_read(user):
                envelope = TransmissionEnvelope.from_bytes(record)
                if envelope.message_id is None:
                    continue
                self._upload_tokens[envelope.upload_token] = envelope.message_id
                self._envelopes[envelope.message_id] = record
                self._mailbox_ids.setdefault(envelope.recipient, []).append(envelope.message_id)
        for record in self.evidence_log():
            self._evidence_ids.add(record.message_id)
        senders = {
            TransmissionEnvelope.from_bytes(record).sender
            for record in self._envelopes.values()
        }
        for sender in senders:
            items, _ = self._outbox_entries(sender)
            for message_id in items:
                self._forwarded.add((sender, message_id))

    def _message_lock(self, message_id: str) -> threading.Lock:
        with self._lock:
            return self._message_locks.setdefault(message_id, threading.Lock())

    # --- upload ---------------------------------------------------------

    def accept_upload(self, envelope: TransmissionEnvelope) -> str:
        """Store a sealed transmission and escrow its wrapped key (HELD)."""
        sender = normalize_email(envelope.sender)
        recipient = normalize_email(envelope.recipient)
        if not self._directory.exists(sender):
            raise UnknownPrincipal(sender)
        if not self._directory.exists(recipient):
            raise UnknownPrincipal(recipient)
        get_suite(envelope.suite_id)
        envelope.validate_structure()

        with self._lock:
            existing = self._upload_tokens.get(envelope.upload_token)
            if existing is not None:
                stored = TransmissionEnvelope.from_bytes(self._envelopes[existing])
                same = (
                    stored.sender == sender
                    and stored.recipient == recipient
                    and stored.m5_bytes() == envelope.m5_bytes()
                    and stored.wrapped_key == envelope.wrapped_key
                )
                if same:
                    return existing
                raise DuplicateUpload(
                    f"upload token {envelope.upload_token!r} already used for {existing}"
                )
            number = self._storage.next_message_number()
            message_id = f"{number:06d}-{self._rng_bytes(4).hex()}"
            assigned = envelope.assigned(message_id, int(self._clock()))
            record = assigned.to_bytes()
            self._storage.mailbox_append(recipient, record)
            self._storage.escrow_put(
                message_id,
                EscrowEntry(message_id, envelope.wrapped_key, EscrowState.HELD).to_bytes(),
            )
            self._upload_tokens[envelope.upload_token] = message_id
            self._envelopes[message_id] = record
            self._mailbox_ids.setdefault(recipient, []).append(message_id)
        return message_id

    # --- mailbox --------------------------------------------------------

    def list_inbox(self, user: str) -> list[InboxEntry]:
        """Inbox preview, newest first; body bytes never leave the store."""
        user = normalize_email(user)
        entries = []
        with self._lock:
            message_ids = list(self._mailbox_ids.get(user, ()))
        for message_id in message_ids:
            envelope = self._find_envelope(message_id)
            escrow = self._escrow_entry(message_id)
            entries.append(InboxEntry(
                message_id=message_id,
                sender=envelope.sender,
                subject=envelope.subject,
                date=envelope.upload_time or envelope.date,
                opened=escrow is not None and escrow.state is EscrowState.RELEASED,
            ))
        entries.sort(key=lambda e: (e.date, e.message_id), reverse=True)
        return entries

    def _find_envelope(self, message_id: str) -> TransmissionEnvelope:
        with self._lock:
            record = self._envelopes.get(message_id)
        if record is None:
            raise NotFound(message_id)
        return TransmissionEnvelope.from_bytes(record)

    def fetch_message(self, user: str, message_id: str) -> bytes:
        """Return the stored transmission bytes; never the wrapped key.
        Fetching does not change escrow state."""
        user = normalize_email(user)
        envelope = self._find_envelope(message_id)
        if envelope.recipient != user:
            raise NotAddressee(f"{message_id} is not addressed to {user}")
        return envelope.m5_bytes()

    # --- escrow / receipts ------------------------------------------------

    def _escrow_entry(self, message_id: str) -> EscrowEntry | None:
        data = self._storage.escrow_get(message_id)
        return EscrowEntry.from_bytes(data) if data is not None else None

    def escrow_state(self, message_id: str) -> EscrowState:
        entry = self._escrow_entry(message_id)
        if entry is None:
            raise NotFound(message_id)
        return entry.state

    def submit_receipt(self, user: str, message_id: str, receipt: Receipt) -> bytes:
        """Trade a valid receipt for the wrapped session key.

        On first valid submission, atomically: log an NRR evidence record,
        enqueue the sealed receipt for the sender, flip escrow to RELEASED,
        and return the wrapped key. Replaying the identical receipt returns
        the same key without new log entries; anything else after release
        fails with no state change.
        """
        user = normalize_email(user)
        envelope = self._find_envelope(message_id)
        if envelope.recipient != user:
            raise NotAddressee(f"{message_id} is not addressed to {user}")

        with self._message_lock(message_id):
            entry = self._escrow_entry(message_id)
            if entry is None:
                raise NotFound(message_id)

            receipt_blob = receipt.to_bytes()
            if entry.state is EscrowState.RELEASED:
                if entry.receipt_blob == receipt_blob:
                    return entry.wrapped_key
                raise AlreadyReleased(f"key for {message_id} already released")

            self._verify_receipt(user, envelope, receipt)

            now = int(self._clock())
            record = EvidenceRecord(
                kind=EvidenceKind.NRR,
                message_id=message_id,
                sender=envelope.sender,
                receiver=user,
                digest=hash_data(envelope.m5_bytes(), get_suite(envelope.suite_id)),
                signature=receipt.receipt_sig,
                recorded_at=now,
            )
            # Order matters for crash safety: evidence, then forwarding,
            # then the state flip. Appends deduplicate by message id in
            # case an earlier attempt died between steps.
            with self._lock:
                evidence_logged = message_id in self._evidence_ids
                forwarded = (envelope.sender, message_id) in self._forwarded
            if not evidence_logged:
                self._storage.evidence_append(record.to_bytes())
                with self._lock:
                    self._evidence_ids.add(message_id)
            if not forwarded:
                item = EvidenceItem(
                    message_id=message_id,
                    sealed_receipt=receipt.sealed_for_sender,
                    forwarded_at=now,
                )
                self._storage.outbox_append(
                    envelope.sender,
                    frame([(Tag.ENTRY_KIND, _ITEM_MARKER), (Tag.EV_RECORD, item.to_bytes())]),
                )
                with self._lock:
                    self._forwarded.add((envelope.sender, message_id))
            released = EscrowEntry(
                message_id=message_id,
                wrapped_key=entry.wrapped_key,
                state=EscrowState.RELEASED,
                released_at=now,
                receipt_blob=receipt_blob,
            )
            self._storage.escrow_put(message_id, released.to_bytes())
            return entry.wrapped_key

    def _verify_receipt(self, user: str, envelope: TransmissionEnvelope, receipt: Receipt) -> None:
        if receipt.message_id != envelope.message_id:
            raise ReceiptInvalid("receipt names a different message")
        if normalize_email(receipt.receiver) != user:
            raise ReceiptInvalid("receipt names a different receiver")
        if not receipt.sealed_for_sender:
            raise ReceiptInvalid("receipt carries no sealed copy for the sender")
        suite = get_suite(envelope.suite_id)
        digest = hash_data(envelope.m5_bytes(), suite)
        signing_pub = self._directory.lookup_public_key(user, KeyRole.SIGNING)
        signature = Signature(
            algorithm=receipt.receipt_sig.algorithm,
            signer=user,
            data=receipt.receipt_sig.data,
        )
        if not verify(signing_pub, digest, signature):
            raise ReceiptInvalid("receipt signature does not verify over the stored transmission")

    # --- evidence ---------------------------------------------------------

    def evidence_log(self) -> list[EvidenceRecord]:
        return [EvidenceRecord.from_bytes(r) for r in self._storage.evidence_read()]

    def _outbox_entries(self, sender: str) -> tuple[dict[str, EvidenceItem], set[str]]:
        items: dict[str, EvidenceItem] = {}
        acked: set[str] = set()
        for record in self._storage.outbox_read(sender):
            parts = unframe_map(record, required=(Tag.ENTRY_KIND,))
            kind = parts[Tag.ENTRY_KIND]
            if kind == _ITEM_MARKER:
                item = EvidenceItem.from_bytes(parts[Tag.EV_RECORD])
                items.setdefault(item.message_id, item)
            elif kind == _ACK_MARKER:
                acked.add(parts[Tag.MESSAGE_ID].decode())
        return items, acked

    def fetch_evidence(self, sender: str) -> list[EvidenceItem]:
        """Unacknowledged sealed receipts for this sender; items persist and
        redeliver until acknowledged."""
        sender = normalize_email(sender)
        items, acked = self._outbox_entries(sender)
        pending = [item for mid, item in items.items() if mid not in acked]
        pending.sort(key=lambda item: (item.forwarded_at, item.message_id))
        return pending

    def ack_evidence(self, sender: str, message_id: str) -> None:
        sender = normalize_email(sender)
        items, acked = self._outbox_entries(sender)
        if message_id not in items:
            raise NotFound(message_id)
        if message_id in acked:
            return
        self._storage.outbox_append(
            sender,
            frame([(Tag.ENTRY_KIND, _ACK_MARKER), (Tag.MESSAGE_ID, message_id.encode())]),
        )

    # --- introspection (harness, dispute verb) -----------------------------

    def message_parties(self, message_id: str) -> tuple[str, str]:
        envelope = self._find_envelope(message_id)
        return envelope.sender, envelope.recipient

    def escrow_ids(self) -> list[str]:
        return self._storage.escrow_ids()

    def stored_m5(self, message_id: str) -> bytes:
        return self._find_envelope(message_id).m5_bytes()

    def stored_suite_id(self, message_id: str) -> str:
        return self._find_envelope(message_id).suite_id

    def wrapped_key_bytes(self, message_id: str) -> bytes:
        """Escrowed key blob, for invariant checking only — no API path
        hands this out without a valid receipt."""
        entry = self._escrow_entry(message_id)
        if entry is None:
            raise NotFound(message_id)
        return entry.wrapped_key
