"""Exception hierarchy.

Every failure mode has its own class so callers can react per stage and the
wire layer can map exceptions to protocol error codes. Pipeline errors carry
a ``stage`` label naming the processing step that rejected the input.
"""

from __future__ import annotations


class EpgpError(Exception):
    """Base class for all errors raised by this package."""


# --- codec ------------------------------------------------------------

class MalformedArmor(EpgpError):
    """Radix-64 armor is structurally invalid (transport corruption)."""

    stage = "armor"


class CorruptStream(EpgpError):
    """A compressed stream is truncated, trailing-garbage, or undecodable."""

    stage = "decompress"


class FrameError(EpgpError):
    """A tag+length frame violates its structural invariants."""

    stage = "framing"


# --- crypto -----------------------------------------------------------

class CryptoError(EpgpError):
    """Base class for cryptographic operation failures."""


class UnknownAlgorithm(CryptoError):
    """An algorithm id does not resolve to a registered implementation."""


class WrongKeyRole(CryptoError):
    """A signing key was used for encryption or vice versa."""


class BadPadding(CryptoError):
    """Symmetric decryption failed: wrong key or tampered ciphertext."""


class UnwrapFailure(CryptoError):
    """Asymmetric key unwrap failed: mismatched key or corrupted blob."""


class UnsealFailure(CryptoError):
    """Decrypting a sealed blob failed: mismatched key or corrupted blob."""


# --- message pipeline --------------------------------------------------

class MessageTooLarge(EpgpError):
    """Message exceeds the configured size cap."""


class PipelineError(EpgpError):
    """A stage of the open pipeline rejected its input."""

    stage = "pipeline"


class KeyUnwrapFailed(PipelineError):
    stage = "key-unwrap"


class DecryptFailed(PipelineError):
    stage = "decrypt"


class DecompressFailed(PipelineError):
    stage = "decompress"


class OriginCheckFailed(PipelineError):
    """The origin signature over the recovered message does not verify."""

    stage = "origin"


class EvidenceInvalid(EpgpError):
    """A receipt or origin proof failed verification.

    ``stage`` is one of ``decrypt`` (unsealing failed), ``signature``
    (recovered blob is not a well-formed signature) or ``digest``
    (well-formed signature that does not bind to the expected digest).
    """

    def __init__(self, stage: str, detail: str = "") -> None:
        super().__init__(f"{stage}: {detail}" if detail else stage)
        self.stage = stage


# --- directory / server -------------------------------------------------

class ServiceError(EpgpError):
    """Base class for server-side request failures; ``code`` crosses the wire."""

    code = "SERVICE_ERROR"


class UnknownPrincipal(ServiceError):
    code = "UNKNOWN_PRINCIPAL"


class EmailTaken(ServiceError):
    code = "EMAIL_TAKEN"


class WeakPassword(ServiceError):
    code = "WEAK_PASSWORD"


class BadCredentials(ServiceError):
    code = "BAD_CREDENTIALS"


class AuthRequired(ServiceError):
    code = "AUTH_REQUIRED"


class NotFound(ServiceError):
    code = "NOT_FOUND"


class NotAddressee(ServiceError):
    code = "NOT_ADDRESSEE"


class SenderMismatch(ServiceError):
    code = "SENDER_MISMATCH"


class ReceiptInvalid(ServiceError):
    code = "RECEIPT_INVALID"


class AlreadyReleased(ServiceError):
    code = "ALREADY_RELEASED"


class DuplicateUpload(ServiceError):
    code = "DUPLICATE_UPLOAD"


class CorruptStore(EpgpError):
    """Persisted server state failed structural validation."""


# --- harness ------------------------------------------------------------

class ScriptError(EpgpError):
    """A scenario script is malformed or references undeclared names."""
