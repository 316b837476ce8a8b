import random
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgp.codec import compress, decompress
from epgp.errors import CorruptStream

from oracles import deflate_stored_ref, inflate_ref


def test_high_redundancy_compresses_hard():
    out = compress(b"a" * 10_000)
    assert len(out) < 200
    assert decompress(out) == b"a" * 10_000


def test_empty_round_trip():
    out = compress(b"")
    assert decompress(out) == b""


def test_random_4k_round_trip():
    data = random.Random(3).randbytes(4096)
    assert decompress(compress(data)) == data


@given(st.binary(max_size=8192))
@settings(max_examples=200, deadline=None)
def test_round_trip_property(data):
    assert decompress(compress(data)) == data


def test_one_mib_round_trip():
    data = random.Random(11).randbytes(1024 * 1024)
    assert decompress(compress(data)) == data


def test_output_decodable_by_independent_decoder():
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randrange(0, 3000)
        data = bytes(rng.choice(b"abcabc\x00\xff hello") for _ in range(n))
        assert inflate_ref(compress(data)) == data


def test_accepts_independent_encoder_stream():
    # stored-block streams from a from-scratch encoder must decode here
    assert decompress(deflate_stored_ref(b"hello")) == b"hello"
    rng = random.Random(6)
    for _ in range(20):
        data = rng.randbytes(rng.randrange(0, 150_000))
        assert decompress(deflate_stored_ref(data)) == data


def test_accepts_any_zlib_level():
    data = b"independent conforming encoder outputs differ by level" * 50
    for level in (1, 9):
        enc = zlib.compressobj(level, zlib.DEFLATED, -15)
        assert decompress(enc.compress(data) + enc.flush()) == data


def test_truncated_stream_rejected():
    stream = compress(b"some data worth compressing" * 20)
    with pytest.raises(CorruptStream):
        decompress(stream[:-3])


def test_trailing_garbage_rejected():
    stream = compress(b"payload")
    with pytest.raises(CorruptStream):
        decompress(stream + b"\x00garbage")


def test_undecodable_input_rejected():
    with pytest.raises(CorruptStream):
        decompress(b"\x07definitely not deflate")


def test_output_size_limit():
    stream = compress(b"b" * 100_000)
    with pytest.raises(CorruptStream):
        decompress(stream, max_output=1000)
    assert decompress(stream, max_output=100_000) == b"b" * 100_000
