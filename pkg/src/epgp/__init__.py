"""Certified e-mail with mutual non-repudiation.

A PGP-style hash/sign/compress/encrypt/armor mail pipeline extended with a
trusted delivery server that withholds the message session key until the
receiver hands over a signed receipt, yielding verifiable evidence of both
origin and receipt plus an offline dispute verifier.
"""

__version__ = "0.1.0"

from .crypto import CLASSIC, MODERN, AlgorithmSuite, get_suite
from .model import (
    EvidenceKind,
    EvidenceRecord,
    PlaintextMessage,
    Receipt,
    TransmissionEnvelope,
)

__all__ = [
    "AlgorithmSuite",
    "CLASSIC",
    "EvidenceKind",
    "EvidenceRecord",
    "MODERN",
    "PlaintextMessage",
    "Receipt",
    "TransmissionEnvelope",
    "get_suite",
    "__version__",
]
