"""Scenario scripts: a reviewable text format for protocol simulations.

One directive per line; ``#`` starts a comment. Example:

    seed 42
    suite classic
    adversary silent_receiver
    principal alice
    principal bob
    message m1 alice bob 256
    upload alice m1
    fetch bob m1
    receipt bob m1
    open bob m1
    evidence alice
    expect delivered m1
    expect escrow-released m1
    expect safety

Actions accept modifiers after the positional arguments:

    upload <sender> <msg> [drop] [forged-by <principal>]
    fetch <receiver> <msg> [drop] [tamper <byte-index>]
    receipt <receiver> <msg> [drop] [replay] [sign-with <principal>]
    open <receiver> <msg>
    evidence <sender>

Declared adversaries reshape honest actions instead of adding new ones:
silent_receiver skips receipt submissions, replaying_receiver submits each
receipt twice, forging_receiver signs receipts with an unregistered key,
impostor_sender signs uploads with an unregistered key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ScriptError

ADVERSARIES = (
    "silent_receiver",
    "replaying_receiver",
    "forging_receiver",
    "impostor_sender",
)

ACTIONS = ("upload", "fetch", "receipt", "open", "evidence")

EXPECTATIONS = (
    "delivered",
    "open-failed",
    "origin-check-failed",
    "escrow-held",
    "escrow-released",
    "nrr-logged",
    "nrr-absent",
    "receipt-rejected",
    "evidence-forwarded",
    "evidence-absent",
    "verdict",
    "safety",
)

VERDICT_WORDS = ("proved", "not-proved", "forged")


@dataclass(frozen=True)
class MessageSpec:
    name: str
    sender: str
    recipient: str
    body_size: int


@dataclass(frozen=True)
class Action:
    kind: str
    actor: str
    message: str | None = None
    drop: bool = False
    replay: bool = False
    tamper_index: int | None = None
    key_override: str | None = None  # principal whose key signs instead


@dataclass(frozen=True)
class Expectation:
    name: str
    message: str | None = None
    verdict: str | None = None

    def text(self) -> str:
        parts = [self.name]
        if self.message:
            parts.append(self.message)
        if self.verdict:
            parts.append(self.verdict)
        return " ".join(parts)


@dataclass
class Scenario:
    seed: int = 0
    suite_id: str = "classic"
    adversary: str | None = None
    principals: list[str] = field(default_factory=list)
    messages: dict[str, MessageSpec] = field(default_factory=dict)
    actions: list[Action] = field(default_factory=list)
    expectations: list[Expectation] = field(default_factory=list)


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario script; ScriptError pinpoints the offending line."""
    scenario = Scenario()

    def fail(line_no: int, why: str) -> ScriptError:
        return ScriptError(f"line {line_no}: {why}")

    def need_principal(line_no: int, name: str) -> str:
        if name not in scenario.principals:
            raise fail(line_no, f"undeclared principal {name!r}")
        return name

    def need_message(line_no: int, name: str) -> str:
        if name not in scenario.messages:
            raise fail(line_no, f"undeclared message {name!r}")
        return name

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        keyword, args = words[0], words[1:]

        if keyword == "seed":
            if len(args) != 1 or not _is_int(args[0]):
                raise fail(line_no, "seed takes one integer")
            scenario.seed = int(args[0])
        elif keyword == "suite":
            if len(args) != 1:
                raise fail(line_no, "suite takes one id")
            scenario.suite_id = args[0]
        elif keyword == "adversary":
            if len(args) != 1 or args[0] not in ADVERSARIES:
                raise fail(line_no, f"adversary must be one of {ADVERSARIES}")
            scenario.adversary = args[0]
        elif keyword == "principal":
            if len(args) != 1:
                raise fail(line_no, "principal takes one name")
            if args[0] in scenario.principals:
                raise fail(line_no, f"duplicate principal {args[0]!r}")
            scenario.principals.append(args[0])
        elif keyword == "message":
            if len(args) != 4 or not _is_int(args[3]):
                raise fail(line_no, "message takes: name sender recipient body-size")
            name, sender, recipient, size = args
            if name in scenario.messages:
                raise fail(line_no, f"duplicate message {name!r}")
            scenario.messages[name] = MessageSpec(
                name=name,
                sender=need_principal(line_no, sender),
                recipient=need_principal(line_no, recipient),
                body_size=int(size),
            )
        elif keyword in ACTIONS:
            scenario.actions.append(_parse_action(
                keyword, args, line_no, fail, need_principal, need_message,
            ))
        elif keyword == "expect":
            scenario.expectations.append(_parse_expectation(args, line_no, fail, need_message))
        else:
            raise fail(line_no, f"unknown directive {keyword!r}")

    if not scenario.principals:
        raise ScriptError("scenario declares no principals")
    return scenario


def _parse_action(kind, args, line_no, fail, need_principal, need_message) -> Action:
    if not args:
        raise fail(line_no, f"{kind} needs an actor")
    actor = need_principal(line_no, args[0])
    rest = args[1:]
    message = None
    if kind != "evidence":
        if not rest:
            raise fail(line_no, f"{kind} needs a message name")
        message = need_message(line_no, rest[0])
        rest = rest[1:]

    drop = replay = False
    tamper_index: int | None = None
    key_override: str | None = None
    i = 0
    while i < len(rest):
        word = rest[i]
        if word == "drop" and kind in ("upload", "fetch", "receipt"):
            drop = True
        elif word == "replay" and kind == "receipt":
            replay = True
        elif word == "tamper" and kind == "fetch":
            i += 1
            if i >= len(rest) or not _is_int(rest[i]):
                raise fail(line_no, "tamper takes a byte index")
            tamper_index = int(rest[i])
        elif word in ("sign-with", "forged-by") and kind in ("receipt", "upload"):
            i += 1
            if i >= len(rest):
                raise fail(line_no, f"{word} takes a principal")
            key_override = need_principal(line_no, rest[i])
        else:
            raise fail(line_no, f"bad modifier {word!r} for {kind}")
        i += 1

    return Action(
        kind=kind,
        actor=actor,
        message=message,
        drop=drop,
        replay=replay,
        tamper_index=tamper_index,
        key_override=key_override,
    )


def _parse_expectation(args, line_no, fail, need_message) -> Expectation:
    if not args or args[0] not in EXPECTATIONS:
        raise fail(line_no, f"expect needs one of {EXPECTATIONS}")
    name = args[0]
    if name == "safety":
        if len(args) != 1:
            raise fail(line_no, "expect safety takes no arguments")
        return Expectation(name=name)
    if name == "verdict":
        if len(args) != 3 or args[2] not in VERDICT_WORDS:
            raise fail(line_no, f"expect verdict takes: message {VERDICT_WORDS}")
        return Expectation(name=name, message=need_message(line_no, args[1]), verdict=args[2])
    if len(args) != 2:
        raise fail(line_no, f"expect {name} takes a message name")
    return Expectation(name=name, message=need_message(line_no, args[1]))


def _is_int(word: str) -> bool:
    try:
        int(word)
        return True
    except ValueError:
        return False
