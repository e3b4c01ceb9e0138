"""Four-party execution harness with prover isolation and byte-accurate transcripts.

Channels exist only between V1 and P1 and between V2 and P2. Each round
runs the four steps in order (V1 sends ``a``, P1 commits, V2 sends
``chall``, P2 opens); payloads are serialised, logged, and decoded again
before delivery, so what a party receives is exactly what went over the
wire. The round verdict is computed from the logged messages.

Isolation is structural: P2 is only ever handed its challenge and the
shared randomness fixed before the round. Every logged message records
which earlier messages its sender had received, and
:func:`isolation_check` audits that causality after the fact.
"""

from __future__ import annotations

import enum
import hashlib
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .protocols import STEPS
from .verdict import Verdict

__all__ = [
    "ALLOWED_CHANNELS",
    "ByteAccounting",
    "FixedChallengeVerifier",
    "HonestProver1",
    "HonestProver2",
    "HonestVerifier1",
    "HonestVerifier2",
    "Message",
    "Outgoing",
    "Party",
    "PartyId",
    "ProtocolViolation",
    "Transcript",
    "byte_accounting",
    "derive_rng",
    "derive_seed",
    "honest_parties",
    "isolation_check",
    "run_protocol",
]


class PartyId(enum.Enum):
    V1 = "V1"
    V2 = "V2"
    P1 = "P1"
    P2 = "P2"

    def __str__(self):
        return self.value


V1, V2, P1, P2 = PartyId.V1, PartyId.V2, PartyId.P1, PartyId.P2

ALLOWED_CHANNELS = frozenset({(V1, P1), (P1, V1), (V2, P2), (P2, V2)})

# (sender, receiver) of each step
_STEP_ROUTE = {"a": (V1, P1), "commit": (P1, V1), "chall": (V2, P2), "open": (P2, V2)}


class ProtocolViolation(RuntimeError):
    pass


def derive_seed(*labels) -> bytes:
    h = hashlib.sha256()
    for label in labels:
        h.update(repr(label).encode())
        h.update(b"\x00")
    return h.digest()


def derive_rng(*labels) -> random.Random:
    """Independent deterministic stream named by ``labels``."""
    return random.Random(int.from_bytes(derive_seed(*labels), "big"))


@dataclass(frozen=True)
class Message:
    round: int
    sender: PartyId
    receiver: PartyId
    step: str
    payload: bytes
    byte_len: int
    # transcript indices of the messages the sender had received this round
    inputs: tuple[int, ...] = ()

    def __post_init__(self):
        if self.byte_len != len(self.payload):
            raise ValueError("byte_len must equal the payload length")

    def export_line(self) -> str:
        return f"{self.round} {self.sender} {self.receiver} {self.step} {self.payload.hex() or '-'} {self.byte_len}"


class Outgoing(NamedTuple):
    receiver: PartyId
    step: str
    payload: object


class Party:
    """Base party. Subclasses override ``start_round`` and/or ``receive``.

    ``setup`` is called once before the first round; provers receive the
    shared seed there, verifiers get ``None``.
    """

    role: PartyId

    def setup(self, protocol, shared_seed: bytes | None, rng: random.Random) -> None:
        self.protocol = protocol
        self.shared_seed = shared_seed
        self.rng = rng

    def start_round(self, rnd: int) -> list[Outgoing]:
        return []

    def receive(self, rnd: int, step: str, payload) -> list[Outgoing]:
        return []


class HonestVerifier1(Party):
    role = V1

    def start_round(self, rnd):
        return [Outgoing(P1, "a", self.protocol.ctx(self.protocol.ctx.random_int(self.rng)))]


class HonestVerifier2(Party):
    role = V2

    def start_round(self, rnd):
        return [Outgoing(P2, "chall", self.rng.getrandbits(1))]


class FixedChallengeVerifier(HonestVerifier2):
    """V2 that always asks the same challenge."""

    def __init__(self, chall: int):
        self.chall = chall

    def start_round(self, rnd):
        return [Outgoing(P2, "chall", self.chall)]


class _Prover(Party):
    def __init__(self, witness):
        self.witness = witness

    def round_state(self, rnd: int):
        # Same seed and round index on both provers -> identical state.
        return self.protocol.shared_state(derive_rng(self.shared_seed, "round", rnd))


class HonestProver1(_Prover):
    role = P1

    def receive(self, rnd, step, payload):
        st = self.round_state(rnd)
        return [Outgoing(V1, "commit", self.protocol.p1(payload, st, self.witness))]


class HonestProver2(_Prover):
    role = P2

    def receive(self, rnd, step, payload):
        st = self.round_state(rnd)
        return [Outgoing(V2, "open", self.protocol.p2(payload, st, self.witness))]


def honest_parties(witness) -> dict[PartyId, Party]:
    return {
        V1: HonestVerifier1(),
        V2: HonestVerifier2(),
        P1: HonestProver1(witness),
        P2: HonestProver2(witness),
    }


@dataclass
class Transcript:
    protocol: object
    messages: list[Message] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    challenges: list[int] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return bool(self.verdicts) and all(self.verdicts)

    @property
    def rounds(self) -> int:
        return len(self.verdicts)

    def acceptance_rate(self) -> float:
        return sum(map(bool, self.verdicts)) / len(self.verdicts) if self.verdicts else 0.0

    def export(self) -> str:
        return "".join(m.export_line() + "\n" for m in self.messages)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.export())


def _check_outgoing(sender: Party, out, step: str) -> Outgoing:
    if len(out) != 1:
        raise ProtocolViolation(f"{sender.role} emitted {len(out)} messages at step {step!r}, expected 1")
    msg = out[0]
    if (sender.role, msg.receiver) not in ALLOWED_CHANNELS:
        raise ProtocolViolation(f"{sender.role} -> {msg.receiver} is not a permitted channel")
    if msg.step != step or _STEP_ROUTE[step] != (sender.role, msg.receiver):
        raise ProtocolViolation(f"{sender.role} sent step {msg.step!r} to {msg.receiver}, expected {step!r}")
    return msg


def run_protocol(
    protocol,
    witness,
    rounds: int,
    parties: dict[PartyId, Party] | None = None,
    seed: int = 0,
) -> Transcript:
    """Run ``rounds`` independent rounds; deterministic in ``seed``.

    Raises :class:`ProtocolViolation` when a party writes to a forbidden
    channel, skips or reorders a step, or sends an undecodable payload.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    parties = parties or honest_parties(witness)
    if set(parties) != set(PartyId):
        raise ValueError("need exactly one party per role")
    for role, party in parties.items():
        if party.role is not role:
            raise ValueError(f"{type(party).__name__} cannot play {role}")
    shared = derive_seed(seed, "prover-shared")
    for role, party in parties.items():
        party.setup(protocol, shared if role in (P1, P2) else None, derive_rng(seed, str(role)))

    t = Transcript(protocol)
    for rnd in range(rounds):
        seen: dict[PartyId, list[int]] = defaultdict(list)
        decoded = {}

        def send(sender: Party, out, step: str):
            msg = _check_outgoing(sender, out, step)
            chall = decoded.get("chall")
            try:
                data = protocol.encode(step, msg.payload, chall)
                value = protocol.decode(step, data, chall)
            except (ValueError, TypeError, AttributeError) as exc:
                raise ProtocolViolation(f"{sender.role} sent an invalid {step!r} payload: {exc}") from exc
            t.messages.append(Message(rnd, sender.role, msg.receiver, step, data, len(data), tuple(seen[sender.role])))
            seen[msg.receiver].append(len(t.messages) - 1)
            decoded[step] = value
            return parties[msg.receiver], value

        p1, a = send(parties[V1], parties[V1].start_round(rnd), "a")
        v1, resp1 = send(p1, p1.receive(rnd, "a", a), "commit")
        v1.receive(rnd, "commit", resp1)
        p2, chall = send(parties[V2], parties[V2].start_round(rnd), "chall")
        v2, resp2 = send(p2, p2.receive(rnd, "chall", chall), "open")
        v2.receive(rnd, "open", resp2)

        t.challenges.append(chall)
        t.verdicts.append(protocol.verify(a, resp1, chall, resp2))
    return t


def isolation_check(t: Transcript) -> bool:
    """Audit channel discipline and causal isolation of the provers.

    Fails if any message uses a forbidden channel, if steps are out of
    order within a round, or if a prover's message depends (transitively)
    on anything that originated on the other verifier's side.
    """
    forbidden = {P1: {V2, P2}, P2: {V1, P1}}
    by_round: dict[int, list[int]] = defaultdict(list)
    origins: list[set[PartyId]] = []
    for idx, m in enumerate(t.messages):
        if (m.sender, m.receiver) not in ALLOWED_CHANNELS:
            return False
        if m.step not in _STEP_ROUTE or _STEP_ROUTE[m.step] != (m.sender, m.receiver):
            return False
        src = {m.sender}
        for j in m.inputs:
            if not 0 <= j < idx or t.messages[j].round != m.round:
                return False
            src |= origins[j]
        origins.append(src)
        if m.sender in forbidden and src & forbidden[m.sender]:
            return False
        by_round[m.round].append(idx)
    for idxs in by_round.values():
        if tuple(t.messages[i].step for i in idxs) != STEPS:
            return False
    return True


@dataclass
class ByteAccounting:
    by_party: dict[str, int]
    by_round: list[int]
    by_challenge: dict[int, list[int]]
    total_bytes: int
    formula_bits_expected: float
    formula_bits_by_challenge: dict[int, float]
    wire_bytes_by_challenge: dict[int, int]

    def mean_bytes(self, chall: int | None = None) -> float:
        rows = self.by_round if chall is None else self.by_challenge.get(chall, [])
        return sum(rows) / len(rows) if rows else 0.0


def byte_accounting(t: Transcript) -> ByteAccounting:
    """Realised byte totals next to the log2(Q)-bits-per-element formula."""
    by_party = {str(p): 0 for p in PartyId}
    by_round = [0] * t.rounds
    for m in t.messages:
        by_party[str(m.sender)] += m.byte_len
        if m.round < len(by_round):
            by_round[m.round] += m.byte_len
    by_chall: dict[int, list[int]] = {0: [], 1: []}
    for rnd, chall in enumerate(t.challenges):
        by_chall[chall].append(by_round[rnd])
    proto = t.protocol
    return ByteAccounting(
        by_party=by_party,
        by_round=by_round,
        by_challenge=by_chall,
        total_bytes=sum(by_party.values()),
        formula_bits_expected=proto.formula_bits(),
        formula_bits_by_challenge=proto.formula_bits_by_challenge(),
        wire_bytes_by_challenge=proto.wire_bytes_by_challenge(),
    )
