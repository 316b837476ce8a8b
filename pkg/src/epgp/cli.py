"""Command-line clients and server launcher.

Thin adapters only: every command wires stdin/argv/config into library
calls and prints the result (add --json for machine-readable output).
Client state (keyring, sent mail, opened mail, evidence) lives in a local
state directory; the keyring is armored and encrypted under a passphrase-
derived key, because signatures are only evidence while nobody else can
produce them.
"""

from __future__ import annotations

import argparse
import getpass
import hashlib
import json
import os
import sys
import time

from .codec import frame, iter_frames, radix64_decode, radix64_encode
from .crypto import (
    DEFAULT_SUITE_ID,
    KeyMaterial,
    KeyRole,
    SessionKey,
    generate_principal_keys,
    get_suite,
    hash_data,
    sym_decrypt,
    sym_encrypt,
)
from .directory import Directory, ScryptHasher, normalize_email
from .errors import AuthRequired, EpgpError, NotFound
from .evidence import Claim, DisputeCase, adjudicate, export_bundle, import_bundle
from .harness import fuzz_protocol, parse_scenario, run_scenario
from .model import EvidenceKind, EvidenceRecord, PlaintextMessage, canonical_bytes
from .receiver import ReceiverStore, issue_receipt, open_message_parts, verify_origin
from .sender import SenderStore, compose_and_seal, verify_receipt
from .server import DeliveryServer, FileStorage, MailService, WireClient, WireServer
from .tags import Tag

KEYRING_LABEL = "EPGP KEYRING"
_SERVER_PRINCIPAL = "server@local"


class CliError(EpgpError):
    """Command cannot proceed; message is printed to stderr."""


# --- configuration ----------------------------------------------------------

_DEFAULTS = {
    "server": "127.0.0.1:7323",
    "data_dir": "./epgp-data",
    "suite": DEFAULT_SUITE_ID,
    "hash_cost": 14,
    "state_dir": os.path.expanduser("~/.epgp"),
}

_ENV_KEYS = {
    "server": "EPGP_SERVER",
    "data_dir": "EPGP_DATA_DIR",
    "suite": "EPGP_SUITE",
    "hash_cost": "EPGP_HASH_COST",
    "state_dir": "EPGP_STATE_DIR",
}


def load_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < environment < command-line flags."""
    cfg = dict(_DEFAULTS)
    path = getattr(args, "config", None) or os.environ.get("EPGP_CONFIG")
    if path is None:
        candidate = os.path.join(cfg["state_dir"], "config.json")
        path = candidate if os.path.exists(candidate) else None
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key, env in _ENV_KEYS.items():
        if os.environ.get(env):
            cfg[key] = os.environ[env]
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["hash_cost"] = int(cfg["hash_cost"])
    return cfg


def _split_address(address: str) -> tuple[str, int]:
    host, _, port = address.rpartition(":")
    if not host or not port.isdigit():
        raise CliError(f"address must be HOST:PORT, got {address!r}")
    return host, int(port)


def _prompt_password(prompt: str, env_var: str = "EPGP_PASSWORD") -> str:
    value = os.environ.get(env_var)
    if value is not None:
        return value
    return getpass.getpass(prompt)


def _prompt_passphrase() -> str:
    value = os.environ.get("EPGP_PASSPHRASE")
    if value is not None:
        return value
    return getpass.getpass("keyring passphrase: ")


# --- keyring ----------------------------------------------------------------

_KDF_LOG2_N = 14


def _keyring_key(passphrase: str, salt: bytes, suite_id: str) -> SessionKey:
    suite = get_suite(suite_id)
    size = suite.symmetric.key_size
    secret = hashlib.scrypt(
        passphrase.encode(), salt=salt, n=1 << _KDF_LOG2_N, r=8, p=1,
        maxmem=256 * 1024 * 1024, dklen=size,
    )
    return SessionKey(algorithm=suite.sym_id, secret=secret)


def save_keyring(path: str, keys: KeyMaterial, passphrase: str) -> None:
    salt = os.urandom(16)
    key = _keyring_key(passphrase, salt, keys.suite_id)
    body = frame([
        (Tag.KDF_SALT, salt),
        (Tag.KDF_PARAMS, json.dumps({"kdf": "scrypt", "log2_n": _KDF_LOG2_N}).encode()),
        (Tag.SUITE_ID, keys.suite_id.encode()),
        (Tag.KEYRING_CT, sym_encrypt(key, keys.to_bytes())),
    ])
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(radix64_encode(body, label=KEYRING_LABEL).to_text())
    os.chmod(path, 0o600)


def load_keyring(path: str, passphrase: str) -> KeyMaterial:
    if not os.path.exists(path):
        raise CliError(f"no keyring at {path}; run `epgp register` first")
    with open(path, "r", encoding="ascii") as fh:
        body = radix64_decode(fh.read(), expected_label=KEYRING_LABEL)
    from .codec import unframe_map

    parts = unframe_map(body, required=(Tag.KDF_SALT, Tag.SUITE_ID, Tag.KEYRING_CT))
    key = _keyring_key(passphrase, parts[Tag.KDF_SALT], parts[Tag.SUITE_ID].decode())
    try:
        plain = sym_decrypt(key, parts[Tag.KEYRING_CT])
    except EpgpError:
        raise CliError("wrong keyring passphrase (or corrupted keyring)") from None
    return KeyMaterial.from_bytes(plain)


# --- client session ---------------------------------------------------------

class ClientContext:
    """Per-invocation bundle of config, stores, and the wire client."""

    def __init__(self, cfg: dict) -> None:
        self.cfg = cfg
        self.state_dir = cfg["state_dir"]
        host, port = _split_address(cfg["server"])
        self.client = WireClient(host, port)
        self.suite = get_suite(cfg["suite"])
        self.sender_store = SenderStore(os.path.join(self.state_dir, "sent.rec"))
        self.receiver_store = ReceiverStore(os.path.join(self.state_dir, "inbox.rec"))
        self._session_path = os.path.join(self.state_dir, "session.json")
        self._keys: KeyMaterial | None = None

    @property
    def keyring_path(self) -> str:
        return os.path.join(self.state_dir, "keyring.asc")

    def keys(self) -> KeyMaterial:
        if self._keys is None:
            self._keys = load_keyring(self.keyring_path, _prompt_passphrase())
        return self._keys

    def _session(self) -> dict | None:
        if not os.path.exists(self._session_path):
            return None
        with open(self._session_path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def _save_session(self, email: str, token: str) -> None:
        os.makedirs(self.state_dir, exist_ok=True)
        with open(self._session_path, "w", encoding="utf-8") as fh:
            json.dump({"email": email, "token": token}, fh)
        os.chmod(self._session_path, 0o600)

    def login(self) -> tuple[str, str]:
        """Cached-token login: reuse the stored session, refresh on expiry."""
        session = self._session()
        if session is not None:
            return session["email"], session["token"]
        email = self.keys().owner
        password = _prompt_password(f"password for {email}: ")
        token = self.client.login(email, password)
        self._save_session(email, token)
        return email, token

    def relogin(self) -> tuple[str, str]:
        if os.path.exists(self._session_path):
            os.remove(self._session_path)
        return self.login()

    def with_token(self, call):
        """Run a token-taking call, refreshing the session once on expiry."""
        _, token = self.login()
        try:
            return call(token)
        except AuthRequired:
            _, token = self.relogin()
            return call(token)

    # local evidence records

    @property
    def evidence_path(self) -> str:
        return os.path.join(self.state_dir, "evidence.rec")

    def evidence_records(self) -> list[EvidenceRecord]:
        if not os.path.exists(self.evidence_path):
            return []
        with open(self.evidence_path, "rb") as fh:
            data = fh.read()
        return [EvidenceRecord.from_bytes(frame(parts)) for parts in iter_frames(data)]

    def append_evidence(self, record: EvidenceRecord) -> None:
        os.makedirs(self.state_dir, exist_ok=True)
        with open(self.evidence_path, "ab") as fh:
            fh.write(record.to_bytes())


def _emit(args: argparse.Namespace, payload: dict, human_lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


# --- commands ----------------------------------------------------------------

def cmd_serve(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    host, port = _split_address(cfg["server"] if args.listen is None else args.listen)
    storage = FileStorage(cfg["data_dir"])
    directory = Directory(storage, hasher=ScryptHasher(log2_n=cfg["hash_cost"]))
    server = DeliveryServer(storage, directory)
    _ensure_server_keys(cfg, directory)
    service = MailService(directory, server)
    wire = WireServer((host, port), service)
    print(f"serving on {host}:{wire.port} (data dir: {cfg['data_dir']})", flush=True)
    try:
        wire.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        wire.server_close()
    return 0


def _ensure_server_keys(cfg: dict, directory: Directory) -> None:
    # the delivery server's own pair: generated once, published, held in
    # reserve (no protocol step uses it)
    path = os.path.join(cfg["data_dir"], "server_keys.rec")
    if os.path.exists(path):
        return
    suite = get_suite(cfg["suite"])
    keys = generate_principal_keys(_SERVER_PRINCIPAL, suite)
    if not directory.exists(_SERVER_PRINCIPAL):
        directory.create_user(
            _SERVER_PRINCIPAL, os.urandom(16).hex(), keys.signing.public, keys.encryption.public,
        )
    with open(path, "wb") as fh:
        fh.write(keys.to_bytes())
    os.chmod(path, 0o600)


def cmd_register(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    ctx = ClientContext(cfg)
    email = normalize_email(args.email)
    password = _prompt_password(f"password for {email}: ")
    confirm = _prompt_password("repeat password: ")
    if password != confirm:
        raise CliError("passwords do not match")
    keys = generate_principal_keys(email, ctx.suite)
    ctx.client.register(email, password, keys.signing.public, keys.encryption.public)
    save_keyring(ctx.keyring_path, keys, _prompt_passphrase())
    _emit(args, {"registered": email, "keyring": ctx.keyring_path},
          [f"registered {email}", f"keyring written to {ctx.keyring_path}"])
    return 0


def _read_body(args: argparse.Namespace) -> bytes:
    if getattr(args, "body_file", None):
        with open(args.body_file, "rb") as fh:
            return fh.read()
    if sys.stdin.isatty():
        print("body (end with EOF):", file=sys.stderr)
    return sys.stdin.buffer.read()


def _send(ctx: ClientContext, args, recipient: str, subject: str, body: bytes) -> str:
    keys = ctx.keys()
    recipient = normalize_email(recipient)
    recipient_pub = ctx.client.pubkey(recipient, KeyRole.ENCRYPTION)
    msg = PlaintextMessage(
        sender=keys.owner,
        recipient=recipient,
        subject=subject,
        date=int(time.time()),
        body=body,
    )
    envelope = compose_and_seal(msg, keys, recipient_pub, ctx.suite)
    message_id = ctx.with_token(lambda tok: ctx.client.upload(tok, envelope))
    ctx.sender_store.put(message_id, recipient, envelope.m5_bytes())
    return message_id


def cmd_send(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    message_id = _send(ctx, args, args.to, args.subject, _read_body(args))
    _emit(args, {"message_id": message_id}, [f"sent: {message_id}"])
    return 0


def cmd_inbox(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    entries = ctx.with_token(ctx.client.inbox)
    entries = [e for e in entries if not ctx.receiver_store.is_deleted(e.message_id)]
    payload = [
        {
            "message_id": e.message_id,
            "from": e.sender,
            "subject": e.subject,
            "date": e.date,
            "opened": e.opened,
        }
        for e in entries
    ]
    lines = [
        f"{e.message_id}  {'opened' if e.opened else 'sealed'}  {e.sender}  "
        f"{time.strftime('%Y-%m-%d %H:%M', time.gmtime(e.date))}  {e.subject}"
        for e in entries
    ] or ["(inbox empty)"]
    _emit(args, {"inbox": payload}, lines)
    return 0


def cmd_fetch(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    m5 = ctx.with_token(lambda tok: ctx.client.fetch(tok, args.id))
    text = m5.decode("ascii")
    _emit(args, {"message_id": args.id, "armored": text}, [text.rstrip("\n")])
    return 0


def cmd_read(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    cached = ctx.receiver_store.opened(args.id)
    if cached is not None:
        return _print_mail(args, args.id, cached, from_cache=True)

    keys = ctx.keys()
    entries = ctx.with_token(ctx.client.inbox)
    entry = next((e for e in entries if e.message_id == args.id), None)
    if entry is None:
        raise NotFound(args.id)
    m5 = ctx.with_token(lambda tok: ctx.client.fetch(tok, args.id))
    sender_enc = ctx.client.pubkey(entry.sender, KeyRole.ENCRYPTION)
    sender_sig = ctx.client.pubkey(entry.sender, KeyRole.SIGNING)

    receipt = ctx.receiver_store.receipt(args.id)
    if receipt is None:
        receipt = issue_receipt(m5, keys, sender_enc, ctx.suite, args.id)
        ctx.receiver_store.record_receipt(receipt)
    wrapped_key = ctx.with_token(lambda tok: ctx.client.receipt(tok, args.id, receipt))

    msg, origin_sig = open_message_parts(m5, wrapped_key, keys, sender_sig, ctx.suite)
    ctx.receiver_store.record_opened(args.id, msg)
    ctx.append_evidence(verify_origin(msg, origin_sig, sender_sig, ctx.suite, message_id=args.id))
    return _print_mail(args, args.id, msg, from_cache=False)


def _print_mail(args, message_id: str, msg: PlaintextMessage, from_cache: bool) -> int:
    body_text = msg.body.decode("utf-8", errors="replace")
    payload = {
        "message_id": message_id,
        "from": msg.sender,
        "to": msg.recipient,
        "subject": msg.subject,
        "date": msg.date,
        "body": body_text,
        "cached": from_cache,
    }
    lines = [
        f"From: {msg.sender}",
        f"To: {msg.recipient}",
        f"Subject: {msg.subject}",
        f"Date: {time.strftime('%Y-%m-%d %H:%M:%S', time.gmtime(msg.date))} UTC",
        "",
        body_text,
    ]
    _emit(args, payload, lines)
    return 0


def cmd_delete(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    ctx.receiver_store.mark_deleted(args.id)
    _emit(args, {"deleted": args.id}, [f"deleted locally: {args.id}"])
    return 0


def cmd_reply(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    original = ctx.receiver_store.opened(args.id)
    if original is None:
        raise CliError(f"message {args.id} not opened locally; run `epgp read {args.id}` first")
    subject = original.subject if original.subject.startswith("Re: ") else f"Re: {original.subject}"
    message_id = _send(ctx, args, original.sender, subject, _read_body(args))
    _emit(args, {"message_id": message_id}, [f"replied: {message_id}"])
    return 0


def cmd_forward(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    original = ctx.receiver_store.opened(args.id)
    if original is None:
        raise CliError(f"message {args.id} not opened locally; run `epgp read {args.id}` first")
    subject = f"Fwd: {original.subject}"
    message_id = _send(ctx, args, args.to, subject, original.body)
    _emit(args, {"message_id": message_id}, [f"forwarded: {message_id}"])
    return 0


def cmd_evidence(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    keys = ctx.keys()
    items = ctx.with_token(ctx.client.evidence)
    results = []
    for item in items:
        stored = ctx.sender_store.get(item.message_id)
        if stored is None:
            results.append({"message_id": item.message_id, "status": "no local transmission record"})
            continue
        recipient, m5 = stored
        receiver_pub = ctx.client.pubkey(recipient, KeyRole.SIGNING)
        record = verify_receipt(
            item.sealed_receipt, keys, receiver_pub, m5, ctx.suite, item.message_id,
        )
        ctx.append_evidence(record)
        ctx.with_token(lambda tok, mid=item.message_id: ctx.client.ack(tok, mid))
        results.append({"message_id": item.message_id, "status": "NRR verified"})
    lines = [f"{r['message_id']}: {r['status']}" for r in results] or ["(no new evidence)"]

    if args.export:
        records = ctx.evidence_records()
        public_keys = {}
        for record in records:
            if record.signer not in public_keys:
                public_keys[record.signer] = ctx.client.pubkey(record.signer, KeyRole.SIGNING)
        with open(args.export, "w", encoding="ascii") as fh:
            fh.write(export_bundle(records, public_keys).to_text())
        lines.append(f"exported {len(records)} records to {args.export}")

    _emit(args, {"evidence": results}, lines)
    return 0


def cmd_dispute(args: argparse.Namespace) -> int:
    ctx = ClientContext(load_config(args))
    claim = Claim.SENDER_CLAIMS_DELIVERY if args.claim == "sender" else Claim.RECEIVER_CLAIMS_ORIGIN
    kind = EvidenceKind.NRR if claim is Claim.SENDER_CLAIMS_DELIVERY else EvidenceKind.NRO

    if args.records:
        with open(args.records, "r", encoding="ascii") as fh:
            records, public_keys = import_bundle(fh.read())
        records = [r for r in records if r.message_id == args.id and r.kind is kind]
    else:
        records = [r for r in ctx.evidence_records() if r.message_id == args.id and r.kind is kind]
        public_keys = {}
        for record in records:
            if record.signer not in public_keys:
                public_keys[record.signer] = ctx.client.pubkey(record.signer, KeyRole.SIGNING)

    if claim is Claim.SENDER_CLAIMS_DELIVERY:
        stored = ctx.sender_store.get(args.id)
        if stored is None:
            raise CliError(f"no sent transmission recorded for {args.id}")
        contested = hash_data(stored[1], ctx.suite)
    else:
        opened = ctx.receiver_store.opened(args.id)
        if opened is None:
            raise CliError(f"message {args.id} not opened locally")
        contested = hash_data(canonical_bytes(opened), ctx.suite)

    case = DisputeCase(
        claim=claim,
        records=tuple(records),
        public_keys=public_keys,
        contested_message_digest=contested,
        message_id=args.id,
    )
    verdict = adjudicate(case)
    kind_name = "NRR" if kind is EvidenceKind.NRR else "NRO"
    _emit(args, {"message_id": args.id, "claim": args.claim, "verdict": verdict.value},
          [f"{kind_name}: {verdict.value}"])
    return 0


def cmd_admin_reset(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    storage = FileStorage(cfg["data_dir"])
    directory = Directory(storage, hasher=ScryptHasher(log2_n=cfg["hash_cost"]))
    new_password = _prompt_password(f"new password for {args.email}: ", env_var="EPGP_NEW_PASSWORD")
    directory.admin_reset_password(args.email, new_password)
    _emit(args, {"reset": args.email}, [f"password reset for {args.email}"])
    return 0


def cmd_sim_run(args: argparse.Namespace) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        scenario = parse_scenario(fh.read())
    if args.seed is not None:
        scenario.seed = args.seed
    report = run_scenario(scenario)
    if getattr(args, "json", False):
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        for line in report.summary_lines():
            print(line)
    return 0 if report.ok else 1


def cmd_sim_fuzz(args: argparse.Namespace) -> int:
    summary = fuzz_protocol(args.iters, args.seed)
    if getattr(args, "json", False):
        print(json.dumps({
            "iterations": summary.iterations,
            "seed": summary.seed,
            "ops": summary.op_counts,
            "uploads": summary.uploads,
            "releases": summary.releases,
            "violations": summary.violations,
        }, sort_keys=True))
    else:
        for line in summary.summary_lines():
            print(line)
    return 0 if summary.ok else 1


# --- parsers -----------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--config", help="config file path")
    parser.add_argument("--server", help="server address HOST:PORT")
    parser.add_argument("--state-dir", dest="state_dir", help="client state directory")
    parser.add_argument("--suite", help="algorithm suite id")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epgp", description="certified mail with mutual non-repudiation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the delivery server")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir", help="server data directory")
    p.add_argument("--listen", help="bind address HOST:PORT (default: --server)")
    p.add_argument("--hash-cost", dest="hash_cost", type=int, help="scrypt log2 cost")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("register", help="create an account and local keyring")
    _add_common(p)
    p.add_argument("email")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("send", help="seal and upload a message")
    _add_common(p)
    p.add_argument("--to", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--body-file", dest="body_file")
    p.set_defaults(func=cmd_send)

    p = sub.add_parser("inbox", help="list inbox previews")
    _add_common(p)
    p.set_defaults(func=cmd_inbox)

    p = sub.add_parser("fetch", help="download the sealed transmission")
    _add_common(p)
    p.add_argument("id")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("read", help="fetch, receipt, and open a message")
    _add_common(p)
    p.add_argument("id")
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("delete", help="hide a message locally")
    _add_common(p)
    p.add_argument("id")
    p.set_defaults(func=cmd_delete)

    p = sub.add_parser("reply", help="reply to an opened message")
    _add_common(p)
    p.add_argument("id")
    p.add_argument("--body-file", dest="body_file")
    p.set_defaults(func=cmd_reply)

    p = sub.add_parser("forward", help="forward an opened message")
    _add_common(p)
    p.add_argument("id")
    p.add_argument("to")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("evidence", help="collect and verify receipt evidence")
    _add_common(p)
    p.add_argument("--export", help="write an armored evidence bundle to this file")
    p.set_defaults(func=cmd_evidence)

    p = sub.add_parser("dispute", help="adjudicate a claim from evidence records")
    _add_common(p)
    p.add_argument("--claim", choices=("sender", "receiver"), required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--records", help="armored evidence bundle (offline adjudication)")
    p.set_defaults(func=cmd_dispute)

    p = sub.add_parser("admin-reset", help="reset a password directly in the data dir")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir", required=True)
    p.add_argument("email")
    p.set_defaults(func=cmd_admin_reset)

    sim = sub.add_parser("sim", help="protocol simulation")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    _add_sim_parsers(sim_sub)

    return parser


def _add_sim_parsers(subparsers) -> None:
    p = subparsers.add_parser("run", help="run a scenario script")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, help="override the scenario's seed")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sim_run)

    p = subparsers.add_parser("fuzz", help="randomized adversarial interleavings")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_sim_fuzz)


def build_sim_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epgp-sim", description="protocol simulation harness")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_sim_parsers(sub)
    return parser


def _run(parser: argparse.ArgumentParser, argv: list[str] | None) -> int:
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EpgpError as exc:
        code = getattr(exc, "code", None) or getattr(exc, "stage", None) or exc.__class__.__name__
        print(f"error [{code}]: {exc}", file=sys.stderr)
        return 1


def main(argv: list[str] | None = None) -> int:
    return _run(build_parser(), argv)


def sim_main(argv: list[str] | None = None) -> int:
    return _run(build_sim_parser(), argv)


if __name__ == "__main__":
    raise SystemExit(main())
