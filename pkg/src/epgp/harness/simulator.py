"""Deterministic protocol simulation over an in-process transport.

Principals A, B, and the delivery server run as plain objects against
in-memory storage; a scripted scenario (or the fuzzer's seeded interleaving
of legal and adversarial calls) drives the same auth-checked service
surface production requests hit. Session keys, IVs, tokens, ids, bodies,
and every interleaving decision derive from the scenario seed; wall-clock
time is replaced by a logical counter. Asymmetric primitives keep their
internal randomness, so reports expose structural facts (actors, verbs,
ids, outcome codes, invariant verdicts), which are seed-stable.

The safety claims checked here: a released key implies a logged receipt
that re-verifies; no call sequence without a valid receipt yields the
wrapped key bytes; replays leave exactly one evidence record.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from ..crypto import (
    KeyMaterial,
    KeyPair,
    KeyRole,
    generate_principal_keys,
    get_suite,
    hash_data,
    verify,
)
from ..directory import Directory, ScryptHasher
from ..errors import EpgpError, EvidenceInvalid, PipelineError, ServiceError
from ..evidence import Claim, DisputeCase, Verdict, adjudicate
from ..model import PlaintextMessage, Receipt, TransmissionEnvelope
from ..receiver import issue_receipt, open_message
from ..sender import compose_and_seal, verify_receipt
from ..server import DeliveryServer, EscrowState, MailService, MemoryStorage
from .scenario import Scenario, parse_scenario

_SIM_DOMAIN = "sim.test"
_EPOCH = 1_700_000_000


class SimClock:
    """Logical time: strictly increasing, no wall-clock inside scenarios."""

    def __init__(self, start: int = _EPOCH) -> None:
        self._now = start

    def __call__(self) -> float:
        self._now += 1
        return float(self._now)


@dataclass
class SimEvent:
    step: int
    actor: str
    verb: str
    message: str | None
    outcome: str

    def line(self) -> str:
        target = f" {self.message}" if self.message else ""
        return f"{self.step:4d} {self.actor:>10} {self.verb}{target}: {self.outcome}"


@dataclass
class _MessageState:
    plaintext: PlaintextMessage
    envelope: TransmissionEnvelope | None = None
    message_id: str | None = None
    copies: dict[str, bytes] = field(default_factory=dict)
    receipt: Receipt | None = None
    wrapped_key: bytes | None = None
    opened: PlaintextMessage | None = None
    open_fail_stage: str | None = None
    receipt_accepted: bool = False
    receipt_rejected: bool = False
    nrr_records: list = field(default_factory=list)


class SimWorld:
    """Shared fixture for scripted runs and the fuzzer."""

    def __init__(
        self,
        principal_names: list[str],
        suite_id: str,
        seed: int,
        server_factory=None,
    ) -> None:
        self.suite = get_suite(suite_id)
        self.rng = random.Random(seed)
        self.clock = SimClock()
        self.storage = MemoryStorage()
        self.directory = Directory(
            self.storage,
            hasher=ScryptHasher(log2_n=4),
            clock=self.clock,
            token_source=self.rng.randbytes,
            token_ttl=10**9,
        )
        factory = server_factory if server_factory is not None else DeliveryServer
        self.server = factory(
            self.storage, self.directory, clock=self.clock, rng_bytes=self.rng.randbytes,
        )
        self.service = MailService(self.directory, self.server)

        self.keys: dict[str, KeyMaterial] = {}
        self.tokens: dict[str, str] = {}
        for name in principal_names:
            email = self.email(name)
            keys = generate_principal_keys(email, self.suite)
            self.directory.create_user(
                email, f"pw-{name}-sim!", keys.signing.public, keys.encryption.public,
            )
            self.keys[name] = keys
            self.tokens[name] = self.directory.authenticate(email, f"pw-{name}-sim!")
        # unregistered key material for forgery adversaries
        self.imposter = generate_principal_keys(f"imposter@{_SIM_DOMAIN}", self.suite)

    @staticmethod
    def email(name: str) -> str:
        return f"{name}@{_SIM_DOMAIN}"

    def forged_material(self, as_owner: str, signing_of: KeyMaterial) -> KeyMaterial:
        """Key material claiming one owner but signing with another's key."""
        owner_email = self.email(as_owner)
        stolen = KeyPair(
            public=signing_of.signing.public,
            private=signing_of.signing.private,
            role=KeyRole.SIGNING,
            owner=owner_email,
        )
        return KeyMaterial(
            owner=owner_email,
            signing=stolen,
            encryption=self.keys[as_owner].encryption,
            suite_id=self.suite.suite_id,
        )

    def make_plaintext(self, sender: str, recipient: str, body_size: int, name: str) -> PlaintextMessage:
        return PlaintextMessage(
            sender=self.email(sender),
            recipient=self.email(recipient),
            subject=f"scenario message {name}",
            date=int(self.clock()),
            body=self.rng.randbytes(body_size),
        )


@dataclass
class ExpectationResult:
    text: str
    passed: bool
    detail: str = ""


@dataclass
class TranscriptReport:
    seed: int
    suite_id: str
    adversary: str | None
    events: list[SimEvent]
    escrow_states: dict[str, str]
    evidence_summary: list[tuple[str, str, bool]]  # (message name, kind, verifies)
    expectations: list[ExpectationResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.expectations)

    def summary_lines(self) -> list[str]:
        lines = [f"scenario: seed={self.seed} suite={self.suite_id} adversary={self.adversary or '-'}"]
        lines += [e.line() for e in self.events]
        lines.append("escrow: " + (
            " ".join(f"{k}={v}" for k, v in sorted(self.escrow_states.items())) or "-"
        ))
        for name, kind, verifies in self.evidence_summary:
            lines.append(f"evidence: {name} {kind} verifies={verifies}")
        for result in self.expectations:
            status = "pass" if result.passed else "FAIL"
            detail = f" ({result.detail})" if result.detail else ""
            lines.append(f"expect {result.text}: {status}{detail}")
        lines.append("result: " + ("PASS" if self.ok else "FAIL"))
        return lines

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "suite": self.suite_id,
            "adversary": self.adversary,
            "events": [
                {
                    "step": e.step, "actor": e.actor, "verb": e.verb,
                    "message": e.message, "outcome": e.outcome,
                }
                for e in self.events
            ],
            "escrow": dict(sorted(self.escrow_states.items())),
            "evidence": [
                {"message": n, "kind": k, "verifies": v} for n, k, v in self.evidence_summary
            ],
            "expectations": [
                {"text": r.text, "passed": r.passed, "detail": r.detail}
                for r in self.expectations
            ],
            "ok": self.ok,
        }


def run_scenario(scenario: Scenario | str, server_factory=None) -> TranscriptReport:
    """Execute a scenario deterministically and evaluate its expectations."""
    if isinstance(scenario, str):
        scenario = parse_scenario(scenario)
    world = SimWorld(
        scenario.principals, scenario.suite_id, scenario.seed, server_factory=server_factory,
    )
    states: dict[str, _MessageState] = {
        name: _MessageState(
            plaintext=world.make_plaintext(spec.sender, spec.recipient, spec.body_size, name)
        )
        for name, spec in scenario.messages.items()
    }
    events: list[SimEvent] = []
    step = 0

    def record(actor: str, verb: str, message: str | None, outcome: str) -> None:
        nonlocal step
        step += 1
        events.append(SimEvent(step, actor, verb, message, outcome))

    for action in scenario.actions:
        state = states[action.message] if action.message else None
        runner = {
            "upload": _run_upload,
            "fetch": _run_fetch,
            "receipt": _run_receipt,
            "open": _run_open,
            "evidence": _run_evidence,
        }[action.kind]
        runner(world, scenario, action, state, states, record)

    escrow_states = {}
    for name, state in states.items():
        if state.message_id is None:
            escrow_states[name] = "ABSENT"
        else:
            escrow_states[name] = world.server.escrow_state(state.message_id).value

    evidence_summary = _summarize_evidence(world, states)
    expectations = [
        _evaluate(world, states, exp, escrow_states) for exp in scenario.expectations
    ]
    return TranscriptReport(
        seed=scenario.seed,
        suite_id=scenario.suite_id,
        adversary=scenario.adversary,
        events=events,
        escrow_states=escrow_states,
        evidence_summary=evidence_summary,
        expectations=expectations,
    )


def _outcome_of(exc: Exception) -> str:
    if isinstance(exc, ServiceError):
        return f"ERR {exc.code}"
    if isinstance(exc, PipelineError):
        return f"ERR PIPELINE {exc.stage}"
    if isinstance(exc, EpgpError):
        return f"ERR {exc.__class__.__name__}"
    raise exc


def _run_upload(world, scenario, action, state, states, record) -> None:
    sender = action.actor
    if state.envelope is None:
        material = world.keys[sender]
        if action.key_override is not None:
            material = world.forged_material(sender, world.keys[action.key_override])
        elif scenario.adversary == "impostor_sender":
            material = world.forged_material(sender, world.imposter)
        recipient_email = state.plaintext.recipient
        recipient_pub = world.directory.lookup_public_key(recipient_email, KeyRole.ENCRYPTION)
        state.envelope = compose_and_seal(
            state.plaintext, material, recipient_pub, world.suite, entropy=world.rng.randbytes,
        )
    if action.drop:
        record(sender, "UPLOAD", action.message, "DROPPED")
        return
    try:
        state.message_id = world.service.upload(world.tokens[sender], state.envelope)
        record(sender, "UPLOAD", action.message, f"OK {state.message_id}")
    except EpgpError as exc:
        record(sender, "UPLOAD", action.message, _outcome_of(exc))


def _run_fetch(world, scenario, action, state, states, record) -> None:
    receiver = action.actor
    if state.message_id is None:
        record(receiver, "FETCH", action.message, "ERR NO_ID")
        return
    try:
        m5 = world.service.fetch(world.tokens[receiver], state.message_id)
    except EpgpError as exc:
        record(receiver, "FETCH", action.message, _outcome_of(exc))
        return
    if action.tamper_index is not None:
        index = action.tamper_index % len(m5)
        flip = world.rng.randrange(1, 256)
        m5 = m5[:index] + bytes([m5[index] ^ flip]) + m5[index + 1:]
        outcome = f"OK TAMPERED@{index}"
    else:
        outcome = "OK"
    if action.drop:
        record(receiver, "FETCH", action.message, "DROPPED")
        return
    state.copies[receiver] = m5
    record(receiver, "FETCH", action.message, outcome)


def _run_receipt(world, scenario, action, state, states, record) -> None:
    receiver = action.actor
    if scenario.adversary == "silent_receiver":
        record(receiver, "RECEIPT", action.message, "SKIPPED silent_receiver")
        return
    copy = state.copies.get(receiver)
    if copy is None or state.message_id is None:
        record(receiver, "RECEIPT", action.message, "ERR NO_LOCAL_COPY")
        return
    material = world.keys[receiver]
    if action.key_override is not None:
        material = world.forged_material(receiver, world.keys[action.key_override])
    elif scenario.adversary == "forging_receiver":
        material = world.forged_material(receiver, world.imposter)
    if state.receipt is None:
        sender_email = state.plaintext.sender
        sender_enc = world.directory.lookup_public_key(sender_email, KeyRole.ENCRYPTION)
        state.receipt = issue_receipt(
            copy, material, sender_enc, world.suite, state.message_id,
            issued_at=int(world.clock()), entropy=world.rng.randbytes,
        )
    if action.drop:
        record(receiver, "RECEIPT", action.message, "DROPPED")
        return
    submissions = 2 if (action.replay or scenario.adversary == "replaying_receiver") else 1
    for attempt in range(submissions):
        try:
            state.wrapped_key = world.service.receipt(
                world.tokens[receiver], state.message_id, state.receipt,
            )
            state.receipt_accepted = True
            record(receiver, "RECEIPT", action.message, f"OK attempt={attempt + 1}")
        except EpgpError as exc:
            state.receipt_rejected = True
            record(receiver, "RECEIPT", action.message, _outcome_of(exc))


def _run_open(world, scenario, action, state, states, record) -> None:
    receiver = action.actor
    copy = state.copies.get(receiver)
    if copy is None:
        record(receiver, "OPEN", action.message, "ERR NO_LOCAL_COPY")
        return
    if state.wrapped_key is None:
        state.open_fail_stage = "key-unwrap"
        record(receiver, "OPEN", action.message, "ERR PIPELINE key-unwrap (no key held)")
        return
    sender_email = state.plaintext.sender
    sender_pub = world.directory.lookup_public_key(sender_email, KeyRole.SIGNING)
    try:
        opened = open_message(copy, state.wrapped_key, world.keys[receiver], sender_pub, world.suite)
    except EpgpError as exc:
        state.open_fail_stage = getattr(exc, "stage", exc.__class__.__name__)
        record(receiver, "OPEN", action.message, f"ERR PIPELINE {state.open_fail_stage}")
        return
    state.opened = opened
    exact = opened == state.plaintext
    record(receiver, "OPEN", action.message, "OK byte-exact" if exact else "OK MISMATCH")


def _run_evidence(world, scenario, action, state, states, record) -> None:
    sender = action.actor
    try:
        items = world.service.evidence(world.tokens[sender])
    except EpgpError as exc:
        record(sender, "EVIDENCE", None, _outcome_of(exc))
        return
    by_id = {s.message_id: (name, s) for name, s in states.items() if s.message_id}
    verified = 0
    for item in items:
        found = by_id.get(item.message_id)
        if found is None:
            continue
        name, msg_state = found
        receiver_email = msg_state.plaintext.recipient
        receiver_pub = world.directory.lookup_public_key(receiver_email, KeyRole.SIGNING)
        try:
            rec = verify_receipt(
                item.sealed_receipt,
                world.keys[sender],
                receiver_pub,
                msg_state.envelope.m5_bytes(),
                world.suite,
                item.message_id,
                recorded_at=int(world.clock()),
            )
            msg_state.nrr_records.append(rec)
            verified += 1
            world.service.ack(world.tokens[sender], item.message_id)
        except EvidenceInvalid as exc:
            record(sender, "EVIDENCE", name, f"ERR EVIDENCE_INVALID {exc.stage}")
    record(sender, "EVIDENCE", None, f"OK items={len(items)} verified={verified}")


def _summarize_evidence(world, states) -> list[tuple[str, str, bool]]:
    by_id = {s.message_id: name for name, s in states.items() if s.message_id}
    summary = []
    for record in world.server.evidence_log():
        name = by_id.get(record.message_id, record.message_id)
        pub = world.directory.lookup_public_key(record.signer, KeyRole.SIGNING)
        summary.append((name, record.kind.value, verify(pub, record.digest, record.signature)))
    return summary


def _evaluate(world, states, exp, escrow_states) -> ExpectationResult:
    name, message = exp.name, exp.message
    state = states.get(message) if message else None

    def result(passed: bool, detail: str = "") -> ExpectationResult:
        return ExpectationResult(text=exp.text(), passed=passed, detail=detail)

    if name == "safety":
        violations = check_server_safety(world.server, world.directory)
        return result(not violations, "; ".join(violations))
    if name == "delivered":
        return result(state.opened is not None and state.opened == state.plaintext)
    if name == "open-failed":
        return result(state.open_fail_stage is not None, state.open_fail_stage or "opened fine")
    if name == "origin-check-failed":
        return result(state.open_fail_stage == "origin", state.open_fail_stage or "opened fine")
    if name == "escrow-held":
        return result(escrow_states.get(message) == "HELD", escrow_states.get(message, ""))
    if name == "escrow-released":
        return result(escrow_states.get(message) == "RELEASED", escrow_states.get(message, ""))
    if name in ("nrr-logged", "nrr-absent"):
        logged = state.message_id is not None and any(
            r.message_id == state.message_id for r in world.server.evidence_log()
        )
        want = name == "nrr-logged"
        return result(logged == want, f"logged={logged}")
    if name == "receipt-rejected":
        return result(state.receipt_rejected)
    if name == "evidence-forwarded":
        return result(state.receipt_accepted)
    if name == "evidence-absent":
        return result(not state.receipt_accepted and not state.nrr_records)
    if name == "verdict":
        verdict = _adjudicate_from_sender(world, state)
        want = {"proved": Verdict.PROVED, "not-proved": Verdict.NOT_PROVED, "forged": Verdict.EVIDENCE_FORGED}[exp.verdict]
        return result(verdict is want, f"got {verdict.value}")
    return result(False, f"unhandled expectation {name}")


def _adjudicate_from_sender(world, state) -> Verdict:
    """Sender-side dispute: local NRR records against the sent transmission."""
    receiver_email = state.plaintext.recipient
    public_keys = {
        receiver_email: world.directory.lookup_public_key(receiver_email, KeyRole.SIGNING),
    }
    contested = hash_data(state.envelope.m5_bytes(), world.suite)
    case = DisputeCase(
        claim=Claim.SENDER_CLAIMS_DELIVERY,
        records=tuple(state.nrr_records),
        public_keys=public_keys,
        contested_message_digest=contested,
        message_id=state.message_id,
    )
    return adjudicate(case)


def check_server_safety(
    server: DeliveryServer,
    directory: Directory,
    already_verified: set[str] | None = None,
) -> list[str]:
    """Invariant sweep over live server state.

    released key => exactly one logged NRR record that re-verifies against
    the stored transmission and the receiver's registered signing key.
    Ids in already_verified skip the signature re-check (it is the costly
    step and signatures are immutable once logged); the set is updated with
    newly verified ids.
    """
    violations: list[str] = []
    log = server.evidence_log()
    by_id = Counter(r.message_id for r in log)
    for message_id, count in by_id.items():
        if count > 1:
            violations.append(f"{message_id}: {count} evidence records (expected at most 1)")
    records = {r.message_id: r for r in log}
    for message_id in server.escrow_ids():
        if server.escrow_state(message_id) is not EscrowState.RELEASED:
            continue
        record = records.get(message_id)
        if record is None:
            violations.append(f"{message_id}: key released but no evidence record logged")
            continue
        suite = get_suite(server.stored_suite_id(message_id))
        digest = hash_data(server.stored_m5(message_id), suite)
        if record.digest != digest:
            violations.append(f"{message_id}: evidence digest does not match stored transmission")
            continue
        if already_verified is not None and message_id in already_verified:
            continue
        pub = directory.lookup_public_key(record.receiver, KeyRole.SIGNING)
        if not verify(pub, record.digest, record.signature):
            violations.append(f"{message_id}: evidence signature does not re-verify")
        elif already_verified is not None:
            already_verified.add(message_id)
    return violations


@dataclass
class FuzzSummary:
    iterations: int
    seed: int
    op_counts: dict[str, int]
    uploads: int
    releases: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary_lines(self) -> list[str]:
        lines = [
            f"fuzz: iterations={self.iterations} seed={self.seed}",
            "ops: " + " ".join(f"{k}={v}" for k, v in sorted(self.op_counts.items())),
            f"messages uploaded={self.uploads} keys released={self.releases}",
        ]
        lines += [f"VIOLATION: {v}" for v in self.violations]
        lines.append(f"violations: {len(self.violations)}")
        return lines


_FUZZ_OPS = (
    ("upload", 18),
    ("fetch", 16),
    ("honest_receipt", 16),
    ("open", 10),
    ("forged_receipt", 8),
    ("tampered_receipt", 7),
    ("replay_receipt", 8),
    ("reissued_receipt", 5),
    ("foreign_token", 4),
    ("non_addressee_fetch", 4),
    ("evidence", 4),
)

_SWEEP_EVERY = 500


def fuzz_protocol(iterations: int, seed: int, server_factory=None) -> FuzzSummary:
    """Random interleavings of legal and adversarial calls with invariant
    checks on every step; the summary is identical for identical seeds."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    world = SimWorld(["alice", "bob"], "classic", seed, server_factory=server_factory)
    rng = world.rng
    alice, bob = "alice", "bob"

    messages: list[_MessageState] = []
    op_counts: Counter[str] = Counter()
    violations: list[str] = []
    accepted_ids: set[str] = set()
    verified_released: set[str] = set()

    ops, weights = zip(*_FUZZ_OPS)

    def b_response_guard(op_name: str, blob: bytes, state: _MessageState) -> None:
        # no response outside an accepted receipt may carry an escrowed key;
        # always screen the fetched message's own key plus a seeded sample
        held = [m for m in messages if m.message_id and m.message_id not in accepted_ids]
        suspects = [state] + (rng.sample(held, min(8, len(held))) if held else [])
        for st in suspects:
            if st.message_id is None or st.message_id in accepted_ids:
                continue
            if st.envelope.wrapped_key and st.envelope.wrapped_key in blob:
                violations.append(
                    f"{st.message_id}: wrapped key bytes leaked via {op_name} without a receipt"
                )

    def pick_message() -> _MessageState | None:
        uploaded = [m for m in messages if m.message_id is not None]
        return rng.choice(uploaded) if uploaded else None

    def do_upload() -> None:
        plain = world.make_plaintext(alice, bob, rng.randrange(0, 512), f"f{len(messages)}")
        recipient_pub = world.directory.lookup_public_key(plain.recipient, KeyRole.ENCRYPTION)
        envelope = compose_and_seal(
            plain, world.keys[alice], recipient_pub, world.suite, entropy=rng.randbytes,
        )
        state = _MessageState(plaintext=plain, envelope=envelope)
        state.message_id = world.service.upload(world.tokens[alice], envelope)
        messages.append(state)

    def ensure_copy(state: _MessageState) -> bytes:
        if bob not in state.copies:
            blob = world.service.fetch(world.tokens[bob], state.message_id)
            b_response_guard("fetch", blob, state)
            state.copies[bob] = blob
        return state.copies[bob]

    def make_receipt(state: _MessageState, material: KeyMaterial, over: bytes) -> Receipt:
        sender_enc = world.directory.lookup_public_key(state.plaintext.sender, KeyRole.ENCRYPTION)
        return issue_receipt(
            over, material, sender_enc, world.suite, state.message_id,
            issued_at=int(world.clock()), entropy=rng.randbytes,
        )

    def submit(state: _MessageState, receipt: Receipt, expect_ok: bool, op_name: str) -> None:
        try:
            blob = world.service.receipt(world.tokens[bob], state.message_id, receipt)
        except ServiceError:
            if expect_ok:
                violations.append(f"{state.message_id}: honest receipt rejected")
            return
        accepted_ids.add(state.message_id)
        state.receipt_accepted = True
        state.wrapped_key = blob
        if not expect_ok:
            violations.append(f"{state.message_id}: {op_name} receipt accepted by server")

    def per_op_counts() -> None:
        # cheap ground-truth checks against storage, every operation
        log_len = len(world.storage.evidence_read())
        if log_len != len(accepted_ids):
            violations.append(
                f"evidence log has {log_len} records for {len(accepted_ids)} released keys"
            )

    def sweep() -> None:
        for problem in check_server_safety(world.server, world.directory, verified_released):
            if problem not in violations:
                violations.append(problem)

    for i in range(iterations):
        op = rng.choices(ops, weights)[0]
        op_counts[op] += 1
        state = pick_message()
        try:
            if op == "upload" or state is None:
                do_upload()
            elif op == "fetch":
                ensure_copy(state)
            elif op == "honest_receipt":
                copy = ensure_copy(state)
                if state.receipt is None:
                    state.receipt = make_receipt(state, world.keys[bob], copy)
                submit(state, state.receipt, expect_ok=True, op_name=op)
            elif op == "open":
                copy = ensure_copy(state)
                if state.wrapped_key is not None:
                    sender_pub = world.directory.lookup_public_key(
                        state.plaintext.sender, KeyRole.SIGNING,
                    )
                    opened = open_message(
                        copy, state.wrapped_key, world.keys[bob], sender_pub, world.suite,
                    )
                    if opened != state.plaintext:
                        violations.append(f"{state.message_id}: opened message differs")
            elif op == "forged_receipt":
                if state.message_id in accepted_ids:
                    continue
                copy = ensure_copy(state)
                forged = world.forged_material(bob, world.imposter)
                submit(state, make_receipt(state, forged, copy), expect_ok=False, op_name=op)
            elif op == "tampered_receipt":
                if state.message_id in accepted_ids:
                    continue
                copy = bytearray(ensure_copy(state))
                copy[rng.randrange(len(copy))] ^= rng.randrange(1, 256)
                submit(
                    state, make_receipt(state, world.keys[bob], bytes(copy)),
                    expect_ok=False, op_name=op,
                )
            elif op == "replay_receipt":
                if state.receipt is not None and state.message_id in accepted_ids:
                    blob = world.service.receipt(world.tokens[bob], state.message_id, state.receipt)
                    if blob != state.wrapped_key:
                        violations.append(f"{state.message_id}: replay returned a different key")
            elif op == "reissued_receipt":
                if state.message_id in accepted_ids and bob in state.copies and state.receipt is not None:
                    fresh = make_receipt(state, world.keys[bob], state.copies[bob])
                    if fresh.to_bytes() != state.receipt.to_bytes():
                        try:
                            world.service.receipt(world.tokens[bob], state.message_id, fresh)
                            violations.append(
                                f"{state.message_id}: non-identical receipt accepted after release"
                            )
                        except ServiceError:
                            pass
            elif op == "foreign_token":
                try:
                    world.service.fetch("deadbeef" * 4, state.message_id)
                    violations.append(f"{state.message_id}: fetch succeeded with a bogus token")
                except ServiceError:
                    pass
            elif op == "non_addressee_fetch":
                try:
                    world.service.fetch(world.tokens[alice], state.message_id)
                    violations.append(f"{state.message_id}: non-addressee fetch succeeded")
                except ServiceError:
                    pass
            elif op == "evidence":
                items = world.service.evidence(world.tokens[alice])
                for item in items[:3]:
                    matching = [m for m in messages if m.message_id == item.message_id]
                    if not matching:
                        continue
                    st = matching[0]
                    receiver_pub = world.directory.lookup_public_key(
                        st.plaintext.recipient, KeyRole.SIGNING,
                    )
                    verify_receipt(
                        item.sealed_receipt, world.keys[alice], receiver_pub,
                        st.envelope.m5_bytes(), world.suite, item.message_id,
                        recorded_at=int(world.clock()),
                    )
                    world.service.ack(world.tokens[alice], item.message_id)
        except (PipelineError, EvidenceInvalid) as exc:
            violations.append(f"op {op}: unexpected pipeline failure: {exc}")
        per_op_counts()
        if (i + 1) % _SWEEP_EVERY == 0:
            sweep()
    sweep()

    return FuzzSummary(
        iterations=iterations,
        seed=seed,
        op_counts=dict(sorted(op_counts.items())),
        uploads=len(messages),
        releases=len(accepted_ids),
        violations=violations,
    )
