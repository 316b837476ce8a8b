import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgp.codec import (
    ArmoredText,
    decode_payload,
    encode_payload,
    radix64_decode,
    radix64_encode,
)
from epgp.errors import MalformedArmor

from oracles import b64_encode_ref

# recomputed with the independent bit-twiddling oracle before freezing
RFC4648_VECTORS = {
    b"": "",
    b"f": "Zg==",
    b"fo": "Zm8=",
    b"foo": "Zm9v",
    b"foob": "Zm9vYg==",
    b"fooba": "Zm9vYmE=",
    b"foobar": "Zm9vYmFy",
}


def test_single_byte_vector():
    armored = radix64_encode(b"\x4d")
    assert armored.payload == "TQ=="
    assert radix64_decode(armored) == b"\x4d"


@pytest.mark.parametrize("data,expected", sorted(RFC4648_VECTORS.items()))
def test_rfc4648_vectors(data, expected):
    assert radix64_encode(data).payload == expected
    assert encode_payload(data) == expected
    assert decode_payload(expected) == data


def test_matches_independent_oracle_on_random_data():
    import random

    rng = random.Random(42)
    for _ in range(300):
        data = rng.randbytes(rng.randrange(0, 400))
        assert radix64_encode(data).payload == b64_encode_ref(data)


def test_empty_input_round_trip():
    armored = radix64_encode(b"")
    assert armored.lines == ()
    assert radix64_decode(armored) == b""
    assert radix64_decode(armored.to_bytes()) == b""


@given(st.binary(max_size=4096))
@settings(max_examples=300, deadline=None)
def test_round_trip_property(data):
    armored = radix64_encode(data)
    assert radix64_decode(armored) == data
    assert radix64_decode(armored.to_text()) == data


def test_large_round_trip():
    import random

    data = random.Random(7).randbytes(1024 * 1024)
    assert radix64_decode(radix64_encode(data)) == data


def test_output_is_printable_ascii_and_wrapped():
    armored = radix64_encode(bytes(range(256)) * 3, label="EPGP MESSAGE")
    text = armored.to_text()
    assert all(31 < ord(c) < 127 or c == "\n" for c in text)
    assert all(len(line) <= 76 for line in armored.lines)
    assert text.startswith("-----BEGIN EPGP MESSAGE-----\n")
    assert text.endswith("-----END EPGP MESSAGE-----\n")


def test_reencoding_is_canonical():
    data = bytes(range(200))
    once = radix64_encode(data)
    again = radix64_encode(radix64_decode(once))
    assert once == again


def test_decoder_accepts_any_line_width():
    payload = encode_payload(b"some payload bytes of moderate length")
    lines = [payload[i:i + 10] for i in range(0, len(payload), 10)]
    text = "-----BEGIN X-----\n" + "\n".join(lines) + "\n-----END X-----\n"
    assert radix64_decode(text) == b"some payload bytes of moderate length"


@pytest.mark.parametrize("payload", ["T!==", "TQ=A", "=QQQ", "TQ=", "TQA", "A===", "AB=C"])
def test_malformed_payloads(payload):
    with pytest.raises(MalformedArmor):
        decode_payload(payload)


def test_nonzero_padding_bits_rejected():
    # "TR==" decodes to the same byte as "TQ==" under a lax decoder; the
    # discarded bits must be zero or tampering would go unnoticed
    assert decode_payload("TQ==") == b"\x4d"
    with pytest.raises(MalformedArmor):
        decode_payload("TR==")
    with pytest.raises(MalformedArmor):
        decode_payload("Zm9=")  # one-pad quantum with dirty low bits


@pytest.mark.parametrize(
    "text",
    [
        "no armor at all",
        "-----BEGIN A-----\nQUJD\n-----END B-----\n",
        "-----BEGIN A-----\nQUJD\n",
        "-----BEGIN A-----\n\n-----END A-----\n",
        "-----BEGIN a-----\nQUJD\n-----END a-----\n",
    ],
)
def test_malformed_structure(text):
    with pytest.raises(MalformedArmor):
        radix64_decode(text)


def test_expected_label_enforced():
    armored = radix64_encode(b"x", label="EPGP MESSAGE")
    with pytest.raises(MalformedArmor):
        radix64_decode(armored, expected_label="EPGP KEYRING")
    with pytest.raises(MalformedArmor):
        ArmoredText.from_text(armored.to_text(), expected_label="EPGP KEYRING")
