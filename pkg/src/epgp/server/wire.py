"""Line-oriented TCP protocol.

One request per connection exchange: the client sends a single line

    VERB arg1 arg2 ...

and reads a single response line, either ``OK [payload ...]`` or
``ERR CODE detail``. Binary arguments cross the wire radix-64 armored as
single-line tokens; multi-field payloads are framed before armoring.
Verbs: REGISTER, LOGIN, UPLOAD, INBOX, FETCH, RECEIPT, EVIDENCE, ACK,
PUBKEY, DISPUTE.
"""

from __future__ import annotations

import socket
import socketserver
import threading

from ..codec import decode_payload, encode_payload
from ..crypto import Digest, KeyRole, PublicKey
from ..errors import (
    AlreadyReleased,
    AuthRequired,
    BadCredentials,
    DuplicateUpload,
    EmailTaken,
    EpgpError,
    NotAddressee,
    NotFound,
    ReceiptInvalid,
    SenderMismatch,
    ServiceError,
    UnknownAlgorithm,
    UnknownPrincipal,
    WeakPassword,
)
from ..evidence import Claim, Verdict
from ..model import EvidenceItem, InboxEntry, Receipt, TransmissionEnvelope
from .service import MailService

MAX_LINE = 64 * 1024 * 1024  # bounds one armored 16 MiB message comfortably

_ERROR_CODES: dict[str, type[ServiceError]] = {
    cls.code: cls
    for cls in (
        ServiceError, UnknownPrincipal, EmailTaken, WeakPassword, BadCredentials,
        AuthRequired, NotFound, NotAddressee, SenderMismatch, ReceiptInvalid,
        AlreadyReleased, DuplicateUpload,
    )
}


class WireError(EpgpError):
    """Client-side: the server answered ERR with an unrecognized code, or
    the exchange itself broke down."""

    def __init__(self, code: str, detail: str = "") -> None:
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


def error_to_line(exc: Exception) -> str:
    if isinstance(exc, ServiceError):
        code = exc.code
    elif isinstance(exc, EpgpError):
        code = "MALFORMED"
    else:
        code = "INTERNAL"
    detail = " ".join(str(exc).split()) or exc.__class__.__name__
    return f"ERR {code} {detail}"


def raise_from_line(code: str, detail: str) -> None:
    cls = _ERROR_CODES.get(code)
    if cls is not None:
        raise cls(detail)
    raise WireError(code, detail)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        line = self.rfile.readline(MAX_LINE)
        if not line:
            return
        try:
            response = self.server.dispatch(line.decode("ascii").strip())  # type: ignore[attr-defined]
        except Exception as exc:  # noqa: BLE001 — every failure must answer the client
            response = error_to_line(exc)
        self.wfile.write(response.encode("ascii") + b"\n")


class WireServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: MailService) -> None:
        super().__init__(address, _Handler)
        self.service = service

    @property
    def port(self) -> int:
        return self.server_address[1]

    def serve_in_thread(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def dispatch(self, line: str) -> str:
        fields = line.split(" ")
        verb, args = fields[0], fields[1:]
        handler = getattr(self, f"_verb_{verb.lower()}", None)
        if handler is None or not verb.isupper():
            return "ERR MALFORMED unknown verb"
        try:
            payload = handler(args)
        except (IndexError, ValueError) as exc:
            return error_to_line(WireError("MALFORMED", str(exc)))
        except Exception as exc:  # noqa: BLE001
            return error_to_line(exc)
        return f"OK {payload}".rstrip()

    # one method per verb; args arrive as wire tokens

    def _verb_register(self, args: list[str]) -> str:
        email, password_b64, signing_b64, encryption_b64 = args
        self.service.register(
            email,
            decode_payload(password_b64).decode(),
            PublicKey.from_bytes(decode_payload(signing_b64)),
            PublicKey.from_bytes(decode_payload(encryption_b64)),
        )
        return ""

    def _verb_login(self, args: list[str]) -> str:
        email, password_b64 = args
        return self.service.login(email, decode_payload(password_b64).decode())

    def _verb_upload(self, args: list[str]) -> str:
        token, envelope_b64 = args
        envelope = TransmissionEnvelope.from_bytes(decode_payload(envelope_b64))
        return self.service.upload(token, envelope)

    def _verb_inbox(self, args: list[str]) -> str:
        (token,) = args
        entries = self.service.inbox(token)
        return " ".join(encode_payload(e.to_bytes()) for e in entries)

    def _verb_fetch(self, args: list[str]) -> str:
        token, message_id = args
        return encode_payload(self.service.fetch(token, message_id))

    def _verb_receipt(self, args: list[str]) -> str:
        token, message_id, receipt_b64 = args
        receipt = Receipt.from_bytes(decode_payload(receipt_b64))
        return encode_payload(self.service.receipt(token, message_id, receipt))

    def _verb_evidence(self, args: list[str]) -> str:
        (token,) = args
        items = self.service.evidence(token)
        return " ".join(encode_payload(i.to_bytes()) for i in items)

    def _verb_ack(self, args: list[str]) -> str:
        token, message_id = args
        self.service.ack(token, message_id)
        return ""

    def _verb_pubkey(self, args: list[str]) -> str:
        email, role = args
        key = self.service.pubkey(email, KeyRole(role))
        return encode_payload(key.to_bytes())

    def _verb_dispute(self, args: list[str]) -> str:
        claim, message_id, digest_alg, digest_b64 = args
        verdict = self.service.dispute(
            Claim(claim),
            message_id,
            Digest(algorithm=digest_alg, data=decode_payload(digest_b64)),
        )
        return verdict.value


class WireClient:
    """One connection per request, mirroring the service surface."""

    def __init__(self, host: str, port: int, timeout: float = 30.0) -> None:
        self._address = (host, port)
        self._timeout = timeout

    def _exchange(self, *tokens: str) -> str:
        line = " ".join(tokens)
        if "\n" in line:
            raise WireError("MALFORMED", "request tokens must not contain newlines")
        with socket.create_connection(self._address, timeout=self._timeout) as sock:
            sock.sendall(line.encode("ascii") + b"\n")
            reader = sock.makefile("rb")
            raw = reader.readline(MAX_LINE)
        response = raw.decode("ascii").rstrip("\n")
        if response == "OK":
            return ""
        if response.startswith("OK "):
            return response[3:]
        if response.startswith("ERR "):
            _, code, *rest = response.split(" ", 2)
            raise_from_line(code, rest[0] if rest else "")
        raise WireError("PROTOCOL", f"unparseable response: {response[:80]!r}")

    def register(self, email: str, password: str, signing_pub: PublicKey, encryption_pub: PublicKey) -> None:
        self._exchange(
            "REGISTER", email,
            encode_payload(password.encode()),
            encode_payload(signing_pub.to_bytes()),
            encode_payload(encryption_pub.to_bytes()),
        )

    def login(self, email: str, password: str) -> str:
        return self._exchange("LOGIN", email, encode_payload(password.encode()))

    def upload(self, token: str, envelope: TransmissionEnvelope) -> str:
        return self._exchange("UPLOAD", token, encode_payload(envelope.to_bytes()))

    def inbox(self, token: str) -> list[InboxEntry]:
        payload = self._exchange("INBOX", token)
        return [InboxEntry.from_bytes(decode_payload(tok)) for tok in payload.split() if tok]

    def fetch(self, token: str, message_id: str) -> bytes:
        return decode_payload(self._exchange("FETCH", token, message_id))

    def receipt(self, token: str, message_id: str, receipt: Receipt) -> bytes:
        return decode_payload(
            self._exchange("RECEIPT", token, message_id, encode_payload(receipt.to_bytes()))
        )

    def evidence(self, token: str) -> list[EvidenceItem]:
        payload = self._exchange("EVIDENCE", token)
        return [EvidenceItem.from_bytes(decode_payload(tok)) for tok in payload.split() if tok]

    def ack(self, token: str, message_id: str) -> None:
        self._exchange("ACK", token, message_id)

    def pubkey(self, email: str, role: KeyRole) -> PublicKey:
        return PublicKey.from_bytes(decode_payload(self._exchange("PUBKEY", email, role.value)))

    def dispute(self, claim: Claim, message_id: str, digest: Digest) -> Verdict:
        return Verdict(self._exchange(
            "DISPUTE", claim.value, message_id, digest.algorithm, encode_payload(digest.data),
        ))
