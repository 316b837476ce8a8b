"""Byte-exact encodings: radix-64 armor, DEFLATE, and tag+length framing.

All operations are pure functions on immutable inputs and safe for
concurrent use.
"""

from .armor import (
    ArmoredText,
    DEFAULT_LABEL,
    decode_payload,
    encode_payload,
    radix64_decode,
    radix64_encode,
)
from .compression import compress, decompress
from .framing import frame, iter_frames, unframe, unframe_map

__all__ = [
    "ArmoredText",
    "DEFAULT_LABEL",
    "compress",
    "decode_payload",
    "decompress",
    "encode_payload",
    "frame",
    "iter_frames",
    "radix64_decode",
    "radix64_encode",
    "unframe",
    "unframe_map",
]
