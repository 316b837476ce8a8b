"""Sending side: seal a message for transmission, verify returned receipts.

The sealing pipeline runs hash -> sign -> compress -> encrypt -> armor, in
that order. The session key is generated fresh per message, wrapped to the
recipient, and not retained after sealing; the sender keeps only the
armored transmission bytes so it can later verify a receipt against them.
"""

from __future__ import annotations

import os
import secrets
import threading
import time
from dataclasses import dataclass

from .codec import ArmoredText, compress, frame, iter_frames, radix64_encode
from .crypto import (
    AlgorithmSuite,
    Digest,
    Entropy,
    KeyMaterial,
    PublicKey,
    Signature,
    generate_session_key,
    hash_data,
    sign,
    sym_encrypt,
    unseal,
    verify,
    wrap_key,
)
from .errors import EvidenceInvalid, MessageTooLarge, UnsealFailure, WrongKeyRole
from .model import (
    EvidenceKind,
    EvidenceRecord,
    MESSAGE_ARMOR_LABEL,
    PlaintextMessage,
    TransmissionEnvelope,
    canonical_bytes,
)
from .tags import Tag

DEFAULT_MESSAGE_CAP = 16 * 1024 * 1024


@dataclass(frozen=True)
class SealTrace:
    """Every intermediate artifact of one sealing run, for stage-level checks."""

    digest: Digest                # stage 1: hash of the canonical message
    signature: Signature          # stage 2a: origin signature over the digest
    signed_frame: bytes           # stage 2b: signature framed with the message
    compressed: bytes             # stage 3: DEFLATE of the signed frame
    ciphertext: bytes             # stage 4: IV + CBC ciphertext under the session key
    armored: ArmoredText          # stage 5: armored framed ciphertext
    envelope: TransmissionEnvelope


def compose_stages(
    msg: PlaintextMessage,
    sender_keys: KeyMaterial,
    recipient_pub: PublicKey,
    suite: AlgorithmSuite,
    entropy: Entropy | None = None,
    message_cap: int = DEFAULT_MESSAGE_CAP,
) -> SealTrace:
    """Run the sealing pipeline, returning all stage outputs."""
    if recipient_pub.role.value != "encryption":
        raise WrongKeyRole("recipient key must be an encryption key")
    if msg.sender != sender_keys.owner:
        raise ValueError(f"message sender {msg.sender!r} does not match key owner {sender_keys.owner!r}")
    if msg.recipient != recipient_pub.owner:
        raise ValueError(
            f"message recipient {msg.recipient!r} does not match key owner {recipient_pub.owner!r}"
        )
    plain = canonical_bytes(msg)
    if len(plain) > message_cap:
        raise MessageTooLarge(f"message is {len(plain)} bytes; cap is {message_cap}")

    digest = hash_data(plain, suite)
    signature = sign(sender_keys.signing.private, digest)
    signed_frame = frame([(Tag.SIG, signature.data), (Tag.MESSAGE, plain)])
    compressed = compress(signed_frame)
    session_key = generate_session_key(suite, entropy)
    ciphertext = sym_encrypt(session_key, compressed, entropy)
    armored = radix64_encode(frame([(Tag.SYM_CT, ciphertext)]), label=MESSAGE_ARMOR_LABEL)
    wrapped = wrap_key(recipient_pub, session_key)
    token = (entropy(16) if entropy is not None else secrets.token_bytes(16)).hex()

    envelope = TransmissionEnvelope(
        sender=sender_keys.owner,
        recipient=recipient_pub.owner,
        suite_id=suite.suite_id,
        subject=msg.subject,
        date=msg.date,
        armored_body=armored,
        wrapped_key=wrapped,
        upload_token=token,
    )
    return SealTrace(
        digest=digest,
        signature=signature,
        signed_frame=signed_frame,
        compressed=compressed,
        ciphertext=ciphertext,
        armored=armored,
        envelope=envelope,
    )


def compose_and_seal(
    msg: PlaintextMessage,
    sender_keys: KeyMaterial,
    recipient_pub: PublicKey,
    suite: AlgorithmSuite,
    entropy: Entropy | None = None,
    message_cap: int = DEFAULT_MESSAGE_CAP,
) -> TransmissionEnvelope:
    """Seal a message; the session key lives only inside the wrapped field."""
    return compose_stages(msg, sender_keys, recipient_pub, suite, entropy, message_cap).envelope


def verify_receipt(
    sealed_receipt: bytes,
    sender_keys: KeyMaterial,
    receiver_pub: PublicKey,
    stored_m5: bytes,
    suite: AlgorithmSuite,
    message_id: str,
    recorded_at: int | None = None,
) -> EvidenceRecord:
    """Open a returned receipt and turn it into a verifiable NRR record.

    Stages: unseal with the sender's private encryption key ("decrypt"),
    structural signature check ("signature"), then verification against the
    receiver's key over the digest of the stored transmission ("digest").
    """
    try:
        recovered = unseal(sender_keys.encryption.private, sealed_receipt, suite)
    except (UnsealFailure, WrongKeyRole) as exc:
        raise EvidenceInvalid("decrypt", str(exc)) from None

    if not _plausible_signature(recovered):
        raise EvidenceInvalid("signature", "recovered blob is not a well-formed signature")

    digest = hash_data(stored_m5, suite)
    signature = Signature(algorithm=receiver_pub.algorithm, signer=receiver_pub.owner, data=recovered)
    if not verify(receiver_pub, digest, signature):
        raise EvidenceInvalid("digest", "receipt signature does not bind to the stored transmission")

    return EvidenceRecord(
        kind=EvidenceKind.NRR,
        message_id=message_id,
        sender=sender_keys.owner,
        receiver=receiver_pub.owner,
        digest=digest,
        signature=signature,
        recorded_at=int(time.time()) if recorded_at is None else recorded_at,
    )


def _plausible_signature(data: bytes) -> bool:
    """Structural check: DSA/ECDSA signatures are DER SEQUENCEs of two integers."""
    from cryptography.hazmat.primitives.asymmetric.utils import decode_dss_signature

    try:
        decode_dss_signature(data)
        return True
    except ValueError:
        return False


class SenderStore:
    """File-backed map message_id -> sent transmission, for receipt checks.

    Records append to a single framed file; the newest record for an id
    wins, which keeps writes append-only.
    """

    def __init__(self, path: str) -> None:
        self._path = path
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[str, bytes]] = {}
        self._load()

    def _load(self) -> None:
        if not os.path.exists(self._path):
            return
        with open(self._path, "rb") as fh:
            data = fh.read()
        for parts in iter_frames(data):
            record = dict(parts)
            message_id = record[Tag.MESSAGE_ID].decode()
            self._entries[message_id] = (record[Tag.RECIPIENT].decode(), record[Tag.MESSAGE])

    def put(self, message_id: str, recipient: str, m5_bytes: bytes) -> None:
        record = frame([
            (Tag.MESSAGE_ID, message_id.encode()),
            (Tag.RECIPIENT, recipient.encode()),
            (Tag.MESSAGE, m5_bytes),
        ])
        with self._lock:
            os.makedirs(os.path.dirname(self._path) or ".", exist_ok=True)
            with open(self._path, "ab") as fh:
                fh.write(record)
                fh.flush()
            self._entries[message_id] = (recipient, m5_bytes)

    def get(self, message_id: str) -> tuple[str, bytes] | None:
        with self._lock:
            return self._entries.get(message_id)

    def message_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._entries)
