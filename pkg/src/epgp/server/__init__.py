"""Trusted delivery server: mailbox store, key escrow, receipt validation,
key release, evidence forwarding, and the TCP wire protocol."""

from .core import DeliveryServer, EscrowEntry, EscrowState
from .service import MailService
from .storage import FileStorage, MemoryStorage, Storage
from .wire import WireClient, WireError, WireServer

__all__ = [
    "DeliveryServer",
    "EscrowEntry",
    "EscrowState",
    "FileStorage",
    "MailService",
    "MemoryStorage",
    "Storage",
    "WireClient",
    "WireError",
    "WireServer",
]
