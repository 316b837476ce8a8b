"""Auth-checked facade over the directory and delivery server.

Every mailbox operation resolves a session token first; the wire layer and
the simulation harness both drive this surface, so adversarial call
sequences exercise exactly the checks production requests hit.
"""

from __future__ import annotations

from ..crypto import KeyRole, PublicKey
from ..directory import Directory
from ..errors import SenderMismatch
from ..evidence import Claim, DisputeCase, Verdict, adjudicate
from ..model import EvidenceItem, InboxEntry, Receipt, TransmissionEnvelope
from ..crypto import Digest
from .core import DeliveryServer


class MailService:
    def __init__(self, directory: Directory, server: DeliveryServer) -> None:
        self.directory = directory
        self.server = server

    # --- account ----------------------------------------------------------

    def register(
        self,
        email: str,
        password: str,
        signing_pub: PublicKey,
        encryption_pub: PublicKey,
    ) -> None:
        self.directory.create_user(email, password, signing_pub, encryption_pub)

    def login(self, email: str, password: str) -> str:
        return self.directory.authenticate(email, password)

    def pubkey(self, email: str, role: KeyRole) -> PublicKey:
        return self.directory.lookup_public_key(email, role)

    # --- mailbox ----------------------------------------------------------

    def upload(self, token: str, envelope: TransmissionEnvelope) -> str:
        user = self.directory.validate_token(token)
        if envelope.sender != user:
            raise SenderMismatch(f"envelope sender {envelope.sender!r} is not the session user")
        return self.server.accept_upload(envelope)

    def inbox(self, token: str) -> list[InboxEntry]:
        user = self.directory.validate_token(token)
        return self.server.list_inbox(user)

    def fetch(self, token: str, message_id: str) -> bytes:
        user = self.directory.validate_token(token)
        return self.server.fetch_message(user, message_id)

    def receipt(self, token: str, message_id: str, receipt: Receipt) -> bytes:
        user = self.directory.validate_token(token)
        return self.server.submit_receipt(user, message_id, receipt)

    def evidence(self, token: str) -> list[EvidenceItem]:
        user = self.directory.validate_token(token)
        return self.server.fetch_evidence(user)

    def ack(self, token: str, message_id: str) -> None:
        user = self.directory.validate_token(token)
        self.server.ack_evidence(user, message_id)

    # --- dispute (third-party accessible, evidence is public by design) ----

    def dispute(self, claim: Claim, message_id: str, contested_digest: Digest) -> Verdict:
        records = [r for r in self.server.evidence_log() if r.message_id == message_id]
        public_keys = {}
        for record in records:
            for principal in (record.sender, record.receiver):
                if principal not in public_keys:
                    public_keys[principal] = self.directory.lookup_public_key(
                        principal, KeyRole.SIGNING,
                    )
        case = DisputeCase(
            claim=claim,
            records=tuple(records),
            public_keys=public_keys,
            contested_message_digest=contested_digest,
            message_id=message_id,
        )
        return adjudicate(case)
