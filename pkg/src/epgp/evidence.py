"""Offline dispute resolution from evidence records alone.

A verdict is computed purely from the case contents: records, public keys,
and the contested digest. Absence of proof and forged proof are distinct
verdicts — a case with no matching record is NotProved, while a record
that claims to match the contested digest but fails signature verification
is EvidenceForged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .codec import ArmoredText, frame, iter_frames, radix64_decode, radix64_encode, unframe
from .crypto import Digest, PublicKey, Signature, verify
from .errors import FrameError
from .model import EvidenceKind, EvidenceRecord
from .tags import Tag

EVIDENCE_ARMOR_LABEL = "EPGP EVIDENCE"


class Claim(Enum):
    SENDER_CLAIMS_DELIVERY = "sender"
    RECEIVER_CLAIMS_ORIGIN = "receiver"


class Verdict(Enum):
    PROVED = "Proved"
    NOT_PROVED = "NotProved"
    EVIDENCE_FORGED = "EvidenceForged"


_CLAIM_KIND = {
    Claim.SENDER_CLAIMS_DELIVERY: EvidenceKind.NRR,
    Claim.RECEIVER_CLAIMS_ORIGIN: EvidenceKind.NRO,
}


@dataclass(frozen=True)
class DisputeCase:
    claim: Claim
    records: tuple[EvidenceRecord, ...]
    public_keys: dict[str, PublicKey]
    contested_message_digest: Digest
    message_id: str | None = None

    def __post_init__(self) -> None:
        missing = {
            record.signer
            for record in self.records
            if record.kind is _CLAIM_KIND[self.claim] and record.signer not in self.public_keys
        }
        if missing:
            raise ValueError(f"case lacks public keys for principals: {sorted(missing)}")


def adjudicate(case: DisputeCase) -> Verdict:
    """Decide a claim from the case contents alone.

    Proved: some record of the claimed kind matches the contested digest
    and its signature re-verifies under the signer's public key.
    EvidenceForged: a record matches the contested digest but its signature
    fails verification. NotProved: nothing matches.
    """
    kind = _CLAIM_KIND[case.claim]
    saw_forged = False
    for record in case.records:
        if record.kind is not kind:
            continue
        if case.message_id is not None and record.message_id != case.message_id:
            continue
        if record.digest != case.contested_message_digest:
            continue
        signature = Signature(
            algorithm=record.signature.algorithm,
            signer=record.signer,
            data=record.signature.data,
        )
        if verify(case.public_keys[record.signer], record.digest, signature):
            return Verdict.PROVED
        saw_forged = True
    return Verdict.EVIDENCE_FORGED if saw_forged else Verdict.NOT_PROVED


def export_bundle(
    records: list[EvidenceRecord],
    public_keys: dict[str, PublicKey],
) -> ArmoredText:
    """Armor records plus the signing keys a third party needs to re-verify."""
    body = frame([
        (Tag.EV_RECORD, _concat([r.to_bytes() for r in records])),
        (Tag.PUBKEY_BLOB, _concat([k.to_bytes() for k in public_keys.values()])),
    ])
    return radix64_encode(body, label=EVIDENCE_ARMOR_LABEL)


def import_bundle(armored: ArmoredText | str | bytes) -> tuple[list[EvidenceRecord], dict[str, PublicKey]]:
    body = radix64_decode(armored, expected_label=EVIDENCE_ARMOR_LABEL)
    parts = dict(unframe(body))
    if set(parts) != {Tag.EV_RECORD, Tag.PUBKEY_BLOB}:
        raise FrameError("evidence bundle must contain records and public keys")
    records = [EvidenceRecord.from_bytes(b) for b in _split(parts[Tag.EV_RECORD])]
    keys = {}
    for blob in _split(parts[Tag.PUBKEY_BLOB]):
        key = PublicKey.from_bytes(blob)
        keys[key.owner] = key
    return records, keys


def _concat(blobs: list[bytes]) -> bytes:
    # frames are self-delimiting, so records simply concatenate
    return b"".join(blobs)


def _split(data: bytes) -> list[bytes]:
    # framing is canonical, so reassembling each parsed frame restores
    # the original record bytes
    return [frame(parts) for parts in iter_frames(data)]
