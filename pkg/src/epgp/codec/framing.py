"""Tag+length framing for byte concatenation.

Frame layout:

    [magic "EF" : 2][part count : u16 BE]
    then per part: [tag : u8][length : u32 BE][payload]

Concatenating signatures and message bytes without delimiters would be
ambiguous for arbitrary payloads; this framing makes every composite
artifact unambiguous and injective. Frames are self-delimiting, so record
files can store them back to back.
"""

from __future__ import annotations

import struct
from typing import Iterable, Sequence

from ..errors import FrameError

MAGIC = b"EF"
HEADER = struct.Struct(">2sH")
PART_HEADER = struct.Struct(">BI")
MAX_PART_SIZE = 2**32 - 1
MAX_PARTS = 2**16 - 1

Part = tuple[int, bytes]


def frame(parts: Sequence[Part]) -> bytes:
    """Assemble ordered (tag, payload) parts into one frame.

    Tags must be unique within the frame and payloads at most 2**32-1
    bytes; violations raise FrameError.
    """
    if len(parts) > MAX_PARTS:
        raise FrameError(f"too many parts: {len(parts)}")
    seen: set[int] = set()
    chunks = [HEADER.pack(MAGIC, len(parts))]
    for tag, payload in parts:
        if not 0 <= tag <= 0xFF:
            raise FrameError(f"tag {tag} out of range")
        if tag in seen:
            raise FrameError(f"duplicate tag {tag}")
        seen.add(tag)
        if len(payload) > MAX_PART_SIZE:
            raise FrameError(f"part with tag {tag} too large")
        chunks.append(PART_HEADER.pack(tag, len(payload)))
        chunks.append(bytes(payload))
    return b"".join(chunks)


def unframe(data: bytes) -> list[Part]:
    """Parse a frame back into its ordered (tag, payload) parts.

    Raises FrameError on bad magic, duplicate tags, declared lengths that
    run past the buffer, or trailing garbage.
    """
    try:
        parts, end = _parse_one(data, 0)
    except _Truncated:
        raise FrameError("frame truncated") from None
    if end != len(data):
        raise FrameError(f"{len(data) - end} trailing bytes after frame")
    return parts


def unframe_map(data: bytes, required: Iterable[int] = ()) -> dict[int, bytes]:
    """Parse a frame into a tag->payload dict, checking required tags."""
    out = dict(unframe(data))
    missing = [tag for tag in required if tag not in out]
    if missing:
        raise FrameError(f"missing required tags: {missing}")
    return out


def iter_frames(data: bytes) -> list[list[Part]]:
    """Split a byte string of back-to-back frames into part lists.

    A truncated final frame (torn write at the end of an append-only file)
    is dropped; corruption anywhere else raises FrameError.
    """
    frames: list[list[Part]] = []
    offset = 0
    while offset < len(data):
        try:
            parts, offset = _parse_one(data, offset)
        except _Truncated:
            break
        frames.append(parts)
    return frames


class _Truncated(Exception):
    """Internal: frame runs past the end of the buffer."""


def _parse_one(data: bytes, offset: int) -> tuple[list[Part], int]:
    if len(data) - offset < HEADER.size:
        raise _Truncated()
    magic, count = HEADER.unpack_from(data, offset)
    if magic != MAGIC:
        raise FrameError("bad frame magic")
    offset += HEADER.size
    parts: list[Part] = []
    seen: set[int] = set()
    for _ in range(count):
        if len(data) - offset < PART_HEADER.size:
            raise _Truncated()
        tag, length = PART_HEADER.unpack_from(data, offset)
        offset += PART_HEADER.size
        if len(data) - offset < length:
            raise _Truncated()
        if tag in seen:
            raise FrameError(f"duplicate tag {tag}")
        seen.add(tag)
        parts.append((tag, data[offset:offset + length]))
        offset += length
    return parts, offset
