"""Radix-64 armor: text encoding of binary artifacts for text-only transports.

Armored form:

    -----BEGIN <label>-----
    <radix-64 payload lines, 76 chars each>
    -----END <label>-----

The encoder wraps at 76 columns; the decoder accepts any line width but is
otherwise strict: alphabet violations, misplaced padding, payload lengths
that are not a multiple of four, and non-zero discarded padding bits all
raise MalformedArmor. Strictness matters — a decoder that tolerates
non-canonical padding bits would silently absorb single-character
tampering in the final quantum.
"""

from __future__ import annotations

import binascii
import base64
import re
import string
from dataclasses import dataclass

from ..errors import MalformedArmor

LINE_WIDTH = 76
DEFAULT_LABEL = "EPGP MESSAGE"

_ALPHABET = string.ascii_uppercase + string.ascii_lowercase + string.digits + "+/"
_ALPHABET_SET = frozenset(_ALPHABET)
_INDEX = {c: i for i, c in enumerate(_ALPHABET)}
_LABEL_RE = re.compile(r"^[A-Z0-9][A-Z0-9 -]*$")


def _begin_line(label: str) -> str:
    return f"-----BEGIN {label}-----"


def _end_line(label: str) -> str:
    return f"-----END {label}-----"


@dataclass(frozen=True)
class ArmoredText:
    """An armored payload: header label plus radix-64 payload lines."""

    label: str
    lines: tuple[str, ...]

    def __post_init__(self) -> None:
        if not _LABEL_RE.match(self.label):
            raise MalformedArmor(f"bad armor label: {self.label!r}")

    def to_text(self) -> str:
        body = [_begin_line(self.label), *self.lines, _end_line(self.label)]
        return "\n".join(body) + "\n"

    def to_bytes(self) -> bytes:
        return self.to_text().encode("ascii")

    @property
    def payload(self) -> str:
        return "".join(self.lines)

    @classmethod
    def from_text(cls, text: str | bytes, expected_label: str | None = None) -> "ArmoredText":
        """Parse armored text; raises MalformedArmor on structural problems."""
        if isinstance(text, bytes):
            try:
                text = text.decode("ascii")
            except UnicodeDecodeError as exc:
                raise MalformedArmor(f"non-ASCII byte in armor: {exc}") from None
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) < 2:
            raise MalformedArmor("armor too short for BEGIN/END lines")
        begin, end = lines[0], lines[-1]
        if not (begin.startswith("-----BEGIN ") and begin.endswith("-----")):
            raise MalformedArmor(f"bad BEGIN line: {begin!r}")
        if not (end.startswith("-----END ") and end.endswith("-----")):
            raise MalformedArmor(f"bad END line: {end!r}")
        label = begin[len("-----BEGIN "):-len("-----")]
        end_label = end[len("-----END "):-len("-----")]
        if label != end_label:
            raise MalformedArmor(f"label mismatch: {label!r} vs {end_label!r}")
        if not _LABEL_RE.match(label):
            raise MalformedArmor(f"bad armor label: {label!r}")
        if expected_label is not None and label != expected_label:
            raise MalformedArmor(f"expected label {expected_label!r}, got {label!r}")
        payload_lines = lines[1:-1]
        for line in payload_lines:
            if not line:
                raise MalformedArmor("empty payload line")
        return cls(label=label, lines=tuple(payload_lines))


def encode_payload(data: bytes) -> str:
    """Encode bytes as one unwrapped radix-64 string (wire-token form)."""
    return base64.b64encode(data).decode("ascii")


def decode_payload(payload: str) -> bytes:
    """Strictly decode a radix-64 string; raises MalformedArmor.

    Enforces: alphabet membership, length divisible by four, '=' only as
    final padding, and zero discarded bits in the last quantum.
    """
    if len(payload) % 4 != 0:
        raise MalformedArmor(f"payload length {len(payload)} not a multiple of 4")
    if not payload:
        return b""
    stripped = payload.rstrip("=")
    pad = len(payload) - len(stripped)
    if pad > 2:
        raise MalformedArmor("more than two padding characters")
    for ch in stripped:
        if ch not in _ALPHABET_SET:
            raise MalformedArmor(f"character {ch!r} outside radix-64 alphabet")
    if pad and len(stripped) % 4 != 4 - pad:
        raise MalformedArmor("padding in the middle of the payload")
    if pad:
        # Discarded low bits of the final symbol must be zero, otherwise
        # distinct armor texts would decode to identical bytes.
        last = _INDEX[stripped[-1]]
        mask = 0b11 if pad == 1 else 0b1111
        if last & mask:
            raise MalformedArmor("non-zero padding bits in final quantum")
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MalformedArmor(str(exc)) from None


def radix64_encode(data: bytes, label: str = DEFAULT_LABEL) -> ArmoredText:
    """Armor bytes: 4-chars-per-3-bytes with '=' padding, 76-char lines."""
    payload = encode_payload(data)
    lines = tuple(payload[i:i + LINE_WIDTH] for i in range(0, len(payload), LINE_WIDTH))
    return ArmoredText(label=label, lines=lines)


def radix64_decode(
    armored: ArmoredText | str | bytes,
    expected_label: str | None = None,
) -> bytes:
    """Inverse of radix64_encode; raises MalformedArmor on corruption."""
    if not isinstance(armored, ArmoredText):
        armored = ArmoredText.from_text(armored, expected_label=expected_label)
    elif expected_label is not None and armored.label != expected_label:
        raise MalformedArmor(f"expected label {expected_label!r}, got {armored.label!r}")
    return decode_payload(armored.payload)
