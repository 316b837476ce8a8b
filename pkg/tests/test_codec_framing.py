import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgp.codec import frame, iter_frames, unframe, unframe_map
from epgp.errors import FrameError


def test_empty_frame():
    data = frame([])
    assert len(data) > 0
    assert unframe(data) == []


def test_two_part_round_trip():
    parts = [(0x03, b"\x01" * 40), (0x07, b"hello")]
    assert unframe(frame(parts)) == parts


def test_order_preserved():
    parts = [(9, b"z"), (1, b"a"), (5, b"m")]
    assert unframe(frame(parts)) == parts


parts_strategy = st.lists(
    st.tuples(st.integers(min_value=0, max_value=255), st.binary(max_size=300)),
    max_size=12,
    unique_by=lambda p: p[0],
)


@given(parts_strategy)
@settings(max_examples=300, deadline=None)
def test_round_trip_property(parts):
    assert unframe(frame(parts)) == parts


@given(parts_strategy, parts_strategy)
@settings(max_examples=300, deadline=None)
def test_injectivity(a, b):
    if a != b:
        assert frame(a) != frame(b)


def test_duplicate_tag_rejected_on_build():
    with pytest.raises(FrameError):
        frame([(1, b"x"), (1, b"y")])


def test_duplicate_tag_rejected_on_parse():
    import struct

    raw = b"EF" + struct.pack(">H", 2) + struct.pack(">BI", 1, 1) + b"x" + struct.pack(">BI", 1, 1) + b"y"
    with pytest.raises(FrameError):
        unframe(raw)


def test_declared_length_past_buffer():
    data = bytearray(frame([(1, b"abcdef")]))
    data[6] = 0xFF  # inflate the part's declared length
    with pytest.raises(FrameError):
        unframe(bytes(data))


def test_truncated_frame():
    data = frame([(1, b"abcdef")])
    with pytest.raises(FrameError):
        unframe(data[:-2])


def test_trailing_garbage():
    with pytest.raises(FrameError):
        unframe(frame([(1, b"x")]) + b"\x00")


def test_bad_magic():
    data = b"XX" + frame([(1, b"x")])[2:]
    with pytest.raises(FrameError):
        unframe(data)


def test_unframe_map_required():
    data = frame([(1, b"x"), (2, b"y")])
    assert unframe_map(data, required=(1, 2)) == {1: b"x", 2: b"y"}
    with pytest.raises(FrameError):
        unframe_map(data, required=(1, 3))


def test_iter_frames_streams_and_tolerates_torn_tail():
    a = frame([(1, b"first")])
    b = frame([(2, b"second")])
    frames = iter_frames(a + b)
    assert frames == [[(1, b"first")], [(2, b"second")]]
    # a torn final append is dropped, earlier records survive
    assert iter_frames(a + b[: len(b) - 3]) == [[(1, b"first")]]
