"""TCP wire protocol: one line per exchange, armored binary fields."""

import socket

import pytest

from epgp.crypto import CLASSIC, KeyRole, hash_data
from epgp.errors import (
    AuthRequired,
    BadCredentials,
    EmailTaken,
    NotAddressee,
    ReceiptInvalid,
    UnknownPrincipal,
)
from epgp.evidence import Claim, Verdict
from epgp.model import PlaintextMessage
from epgp.receiver import issue_receipt, open_message
from epgp.sender import compose_and_seal
from epgp.server import WireClient, WireServer

from conftest import ALICE, BOB, EVE, PASSWORDS

pytestmark = pytest.mark.usefixtures("wire_server")


@pytest.fixture()
def wire_server(service):
    server = WireServer(("127.0.0.1", 0), service)
    thread = server.serve_in_thread()
    yield server
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


@pytest.fixture()
def client(wire_server):
    return WireClient("127.0.0.1", wire_server.port)


def test_register_login_pubkey_over_wire(client, classic_keys):
    fresh = "carol@unit.test"
    from epgp.crypto import generate_principal_keys

    keys = generate_principal_keys(fresh, CLASSIC)
    client.register(fresh, "carol-pass-1", keys.signing.public, keys.encryption.public)
    with pytest.raises(EmailTaken):
        client.register(fresh, "carol-pass-1", keys.signing.public, keys.encryption.public)
    token = client.login(fresh, "carol-pass-1")
    assert client.inbox(token) == []
    assert client.pubkey(fresh, KeyRole.SIGNING) == keys.signing.public
    with pytest.raises(BadCredentials):
        client.login(fresh, "wrong-password")
    with pytest.raises(UnknownPrincipal):
        client.pubkey("ghost@unit.test", KeyRole.SIGNING)


def test_full_flow_over_wire(client, alice, bob):
    token_a = client.login(ALICE, PASSWORDS[ALICE])
    token_b = client.login(BOB, PASSWORDS[BOB])

    msg = PlaintextMessage(ALICE, BOB, "over the wire", 1_700_100_000, b"wire body \x00\xff")
    recipient_pub = client.pubkey(BOB, KeyRole.ENCRYPTION)
    env = compose_and_seal(msg, alice, recipient_pub, CLASSIC)
    message_id = client.upload(token_a, env)

    entries = client.inbox(token_b)
    assert [e.message_id for e in entries] == [message_id]

    m5 = client.fetch(token_b, message_id)
    assert m5 == env.m5_bytes()

    sender_enc = client.pubkey(ALICE, KeyRole.ENCRYPTION)
    receipt = issue_receipt(m5, bob, sender_enc, CLASSIC, message_id)
    wrapped = client.receipt(token_b, message_id, receipt)
    assert wrapped == env.wrapped_key

    sender_sig = client.pubkey(ALICE, KeyRole.SIGNING)
    assert open_message(m5, wrapped, bob, sender_sig, CLASSIC) == msg

    items = client.evidence(token_a)
    assert [i.message_id for i in items] == [message_id]
    client.ack(token_a, message_id)
    assert client.evidence(token_a) == []

    digest = hash_data(env.m5_bytes(), CLASSIC)
    assert client.dispute(Claim.SENDER_CLAIMS_DELIVERY, message_id, digest) is Verdict.PROVED


def test_error_codes_cross_the_wire(client, alice, bob, eve):
    token_a = client.login(ALICE, PASSWORDS[ALICE])
    token_e = client.login(EVE, PASSWORDS[EVE])
    msg = PlaintextMessage(ALICE, BOB, "s", 1, b"x")
    env = compose_and_seal(msg, alice, bob.encryption.public, CLASSIC)
    message_id = client.upload(token_a, env)

    with pytest.raises(AuthRequired):
        client.inbox("00ff" * 8)
    with pytest.raises(NotAddressee):
        client.fetch(token_e, message_id)

    forged = issue_receipt(env.m5_bytes(), eve, alice.encryption.public, CLASSIC, message_id)
    from epgp.model import Receipt

    forged = Receipt(message_id, BOB, forged.receipt_sig, forged.sealed_for_sender, 1)
    token_b = client.login(BOB, PASSWORDS[BOB])
    with pytest.raises(ReceiptInvalid):
        client.receipt(token_b, message_id, forged)


def test_dispute_not_proved_before_receipt(client, alice, bob):
    token_a = client.login(ALICE, PASSWORDS[ALICE])
    msg = PlaintextMessage(ALICE, BOB, "s", 1, b"pending")
    env = compose_and_seal(msg, alice, bob.encryption.public, CLASSIC)
    message_id = client.upload(token_a, env)
    digest = hash_data(env.m5_bytes(), CLASSIC)
    assert client.dispute(Claim.SENDER_CLAIMS_DELIVERY, message_id, digest) is Verdict.NOT_PROVED


def test_malformed_requests_get_err_lines(wire_server):
    def raw_exchange(line: bytes) -> bytes:
        with socket.create_connection(("127.0.0.1", wire_server.port), timeout=10) as sock:
            sock.sendall(line)
            return sock.makefile("rb").readline()

    assert raw_exchange(b"BOGUSVERB arg\n").startswith(b"ERR MALFORMED")
    assert raw_exchange(b"LOGIN onlyone\n").startswith(b"ERR MALFORMED")
    assert raw_exchange(b"FETCH tok not-armored!!\n").startswith(b"ERR ")
    assert raw_exchange(b"INBOX !!!bad-token!!!\n").startswith(b"ERR ")
