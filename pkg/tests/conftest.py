import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # tests/oracles.py

from epgp.crypto import CLASSIC, MODERN, generate_principal_keys
from epgp.directory import Directory, ScryptHasher
from epgp.server import DeliveryServer, MailService, MemoryStorage

# key generation is the slow part of the suite; share principals per session
ALICE = "alice@unit.test"
BOB = "bob@unit.test"
EVE = "eve@unit.test"

PASSWORDS = {ALICE: "alice-pass-1", BOB: "bob-pass-22", EVE: "eve-pass-333"}


@pytest.fixture(scope="session")
def classic_keys():
    return {email: generate_principal_keys(email, CLASSIC) for email in (ALICE, BOB, EVE)}


@pytest.fixture(scope="session")
def modern_keys():
    return {email: generate_principal_keys(email, MODERN) for email in (ALICE, BOB)}


@pytest.fixture(scope="session")
def alice(classic_keys):
    return classic_keys[ALICE]


@pytest.fixture(scope="session")
def bob(classic_keys):
    return classic_keys[BOB]


@pytest.fixture(scope="session")
def eve(classic_keys):
    return classic_keys[EVE]


def make_world(keys, storage=None, clock=None):
    """Directory + server + service over the given principals."""
    storage = storage if storage is not None else MemoryStorage()
    kwargs = {"hasher": ScryptHasher(log2_n=4)}
    if clock is not None:
        kwargs["clock"] = clock
    directory = Directory(storage, **kwargs)
    for email, material in keys.items():
        directory.create_user(
            email, PASSWORDS[email], material.signing.public, material.encryption.public,
        )
    server_kwargs = {} if clock is None else {"clock": clock}
    server = DeliveryServer(storage, directory, **server_kwargs)
    return MailService(directory, server)


@pytest.fixture()
def service(classic_keys):
    return make_world(classic_keys)


@pytest.fixture()
def tokens(service):
    return {
        email: service.login(email, password)
        for email, password in PASSWORDS.items()
    }
