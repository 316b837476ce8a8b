"""Raw DEFLATE compression (RFC 1951 semantics, no zlib/gzip wrapper).

Streams are bit-compatible with any conforming DEFLATE codec: output from
here decodes elsewhere, and input from any conforming encoder decodes here.
"""

from __future__ import annotations

import zlib

from ..errors import CorruptStream

_RAW_DEFLATE = -15  # negative wbits selects a bare RFC 1951 stream
_LEVEL = 6


def compress(data: bytes) -> bytes:
    """Compress bytes into a raw DEFLATE stream."""
    enc = zlib.compressobj(_LEVEL, zlib.DEFLATED, _RAW_DEFLATE)
    return enc.compress(data) + enc.flush()


def decompress(data: bytes, max_output: int | None = None) -> bytes:
    """Inverse of compress; accepts any conforming raw DEFLATE stream.

    Raises CorruptStream on undecodable input, truncation, trailing bytes
    after the final block, or output exceeding max_output.
    """
    dec = zlib.decompressobj(_RAW_DEFLATE)
    try:
        out = dec.decompress(data, max_output or 0)
    except zlib.error as exc:
        raise CorruptStream(f"undecodable stream: {exc}") from None
    if max_output is not None and dec.unconsumed_tail:
        raise CorruptStream(f"output exceeds {max_output} byte limit")
    if not dec.eof:
        raise CorruptStream("truncated stream")
    if dec.unused_data:
        raise CorruptStream(f"{len(dec.unused_data)} trailing bytes after stream")
    return out
