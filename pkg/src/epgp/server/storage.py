"""Storage backends for the delivery server.

FileStorage keeps everything under one data directory:

    users/<slug>.rec      one framed record per user (atomic replace)
    mailbox/<slug>.rec    framed envelope records, append-only
    escrow/<id>.rec       one framed escrow entry per message (atomic replace)
    evidence.log          framed NRR records, append-only
    outbox/<slug>.rec     framed evidence items + ack markers, append-only
    counter               monotonic message number

Escrow transitions and evidence appends fsync before returning, so the
"key released implies receipt logged" invariant survives crashes.
MemoryStorage mirrors the same interface for tests and the simulator.
"""

from __future__ import annotations

import base64
import os
import threading
from typing import Protocol

from ..errors import CorruptStore


class Storage(Protocol):
    def get_user(self, email: str) -> bytes | None: ...
    def put_user(self, email: str, record: bytes) -> None: ...
    def list_users(self) -> list[bytes]: ...
    def mailbox_append(self, email: str, record: bytes) -> None: ...
    def mailbox_read(self, email: str) -> list[bytes]: ...
    def mailbox_users(self) -> list[str]: ...
    def escrow_put(self, message_id: str, record: bytes) -> None: ...
    def escrow_get(self, message_id: str) -> bytes | None: ...
    def escrow_ids(self) -> list[str]: ...
    def evidence_append(self, record: bytes) -> None: ...
    def evidence_read(self) -> list[bytes]: ...
    def outbox_append(self, email: str, record: bytes) -> None: ...
    def outbox_read(self, email: str) -> list[bytes]: ...
    def next_message_number(self) -> int: ...


class MemoryStorage:
    """In-memory backend with the same contract as FileStorage."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._users: dict[str, bytes] = {}
        self._mailboxes: dict[str, list[bytes]] = {}
        self._escrow: dict[str, bytes] = {}
        self._evidence: list[bytes] = []
        self._outboxes: dict[str, list[bytes]] = {}
        self._counter = 0

    def get_user(self, email: str) -> bytes | None:
        with self._lock:
            return self._users.get(email)

    def put_user(self, email: str, record: bytes) -> None:
        with self._lock:
            self._users[email] = record

    def list_users(self) -> list[bytes]:
        with self._lock:
            return list(self._users.values())

    def mailbox_append(self, email: str, record: bytes) -> None:
        with self._lock:
            self._mailboxes.setdefault(email, []).append(record)

    def mailbox_read(self, email: str) -> list[bytes]:
        with self._lock:
            return list(self._mailboxes.get(email, []))

    def mailbox_users(self) -> list[str]:
        with self._lock:
            return sorted(self._mailboxes)

    def escrow_put(self, message_id: str, record: bytes) -> None:
        with self._lock:
            self._escrow[message_id] = record

    def escrow_get(self, message_id: str) -> bytes | None:
        with self._lock:
            return self._escrow.get(message_id)

    def escrow_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._escrow)

    def evidence_append(self, record: bytes) -> None:
        with self._lock:
            self._evidence.append(record)

    def evidence_read(self) -> list[bytes]:
        with self._lock:
            return list(self._evidence)

    def outbox_append(self, email: str, record: bytes) -> None:
        with self._lock:
            self._outboxes.setdefault(email, []).append(record)

    def outbox_read(self, email: str) -> list[bytes]:
        with self._lock:
            return list(self._outboxes.get(email, []))

    def next_message_number(self) -> int:
        with self._lock:
            self._counter += 1
            return self._counter


def _slug(email: str) -> str:
    return base64.urlsafe_b64encode(email.encode()).decode().rstrip("=")


def _unslug(slug: str) -> str:
    padded = slug + "=" * (-len(slug) % 4)
    return base64.urlsafe_b64decode(padded).decode()


_LEN_PREFIX = 4


def _append_record(path: str, record: bytes, sync: bool) -> None:
    with open(path, "ab") as fh:
        fh.write(len(record).to_bytes(_LEN_PREFIX, "big") + record)
        fh.flush()
        if sync:
            os.fsync(fh.fileno())


def _read_records(path: str) -> list[bytes]:
    if not os.path.exists(path):
        return []
    with open(path, "rb") as fh:
        data = fh.read()
    records: list[bytes] = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < _LEN_PREFIX:
            break  # torn tail from an interrupted append
        length = int.from_bytes(data[offset:offset + _LEN_PREFIX], "big")
        offset += _LEN_PREFIX
        if length > len(data) - offset:
            break
        records.append(data[offset:offset + length])
        offset += length
    return records


def _replace_file(path: str, content: bytes, sync: bool) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(content)
        fh.flush()
        if sync:
            os.fsync(fh.fileno())
    os.replace(tmp, path)
    if sync:
        dir_fd = os.open(os.path.dirname(path) or ".", os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)


class FileStorage:
    """Single-directory file store; see the module docstring for layout."""

    def __init__(self, data_dir: str) -> None:
        self._dir = data_dir
        self._lock = threading.Lock()
        for sub in ("users", "mailbox", "escrow", "outbox"):
            os.makedirs(os.path.join(data_dir, sub), exist_ok=True)

    def _user_path(self, email: str) -> str:
        return os.path.join(self._dir, "users", _slug(email) + ".rec")

    def _mailbox_path(self, email: str) -> str:
        return os.path.join(self._dir, "mailbox", _slug(email) + ".rec")

    def _escrow_path(self, message_id: str) -> str:
        if "/" in message_id or message_id.startswith("."):
            raise CorruptStore(f"unsafe message id: {message_id!r}")
        return os.path.join(self._dir, "escrow", message_id + ".rec")

    def _outbox_path(self, email: str) -> str:
        return os.path.join(self._dir, "outbox", _slug(email) + ".rec")

    def get_user(self, email: str) -> bytes | None:
        path = self._user_path(email)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            return fh.read()

    def put_user(self, email: str, record: bytes) -> None:
        with self._lock:
            _replace_file(self._user_path(email), record, sync=True)

    def list_users(self) -> list[bytes]:
        out = []
        users_dir = os.path.join(self._dir, "users")
        for name in sorted(os.listdir(users_dir)):
            if name.endswith(".rec"):
                with open(os.path.join(users_dir, name), "rb") as fh:
                    out.append(fh.read())
        return out

    def mailbox_append(self, email: str, record: bytes) -> None:
        with self._lock:
            _append_record(self._mailbox_path(email), record, sync=True)

    def mailbox_read(self, email: str) -> list[bytes]:
        return _read_records(self._mailbox_path(email))

    def mailbox_users(self) -> list[str]:
        box_dir = os.path.join(self._dir, "mailbox")
        return sorted(
            _unslug(name[:-len(".rec")])
            for name in os.listdir(box_dir)
            if name.endswith(".rec")
        )

    def escrow_put(self, message_id: str, record: bytes) -> None:
        with self._lock:
            _replace_file(self._escrow_path(message_id), record, sync=True)

    def escrow_get(self, message_id: str) -> bytes | None:
        path = self._escrow_path(message_id)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            return fh.read()

    def escrow_ids(self) -> list[str]:
        escrow_dir = os.path.join(self._dir, "escrow")
        return sorted(
            name[:-len(".rec")] for name in os.listdir(escrow_dir) if name.endswith(".rec")
        )

    def evidence_append(self, record: bytes) -> None:
        with self._lock:
            _append_record(os.path.join(self._dir, "evidence.log"), record, sync=True)

    def evidence_read(self) -> list[bytes]:
        return _read_records(os.path.join(self._dir, "evidence.log"))

    def outbox_append(self, email: str, record: bytes) -> None:
        with self._lock:
            _append_record(self._outbox_path(email), record, sync=True)

    def outbox_read(self, email: str) -> list[bytes]:
        return _read_records(self._outbox_path(email))

    def next_message_number(self) -> int:
        with self._lock:
            path = os.path.join(self._dir, "counter")
            current = 0
            if os.path.exists(path):
                with open(path, "rb") as fh:
                    raw = fh.read().strip()
                if raw:
                    try:
                        current = int(raw)
                    except ValueError:
                        raise CorruptStore(f"bad counter file: {raw!r}") from None
            current += 1
            _replace_file(path, str(current).encode(), sync=True)
            return current
