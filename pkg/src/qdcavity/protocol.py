"""Turn-based simulation of the six-step cavity-QED quantum dialogue."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from qdcavity.adversary import AttackKind, AttackModel, EveRecord
from qdcavity.cavity import (
    BellState,
    Collection,
    EncodingOp,
    ZOutcomePair,
    bell_correlation,
    cavity_gate,
    classify,
    decode_peer_op,
)
from qdcavity.quantum import AtomBasis, MeasBasis, Register, make_state

log = logging.getLogger(__name__)

BASIS_POLICIES = ("random", "Z", "X")


@dataclass
class ProtocolConfig:
    n_message_pairs: int = 1
    initial_states: list[BellState] | None = None
    first_check_samples: int | None = None
    second_check_samples: int | None = None
    error_threshold: float = 0.0
    rng_seed: int = 0
    # basis policy for Bob's sample measurements and for decoy preparation
    first_check_basis: str = "random"
    decoy_basis: str = "random"
    randomize_initials: bool = False

    def __post_init__(self):
        if self.n_message_pairs < 1:
            raise ValueError("n_message_pairs must be >= 1")
        if self.first_check_samples is None:
            self.first_check_samples = self.n_message_pairs
        if self.second_check_samples is None:
            self.second_check_samples = self.n_message_pairs
        if self.first_check_samples < 0 or self.second_check_samples < 0:
            raise ValueError("sample counts must be >= 0")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")
        for name in ("first_check_basis", "decoy_basis"):
            if getattr(self, name) not in BASIS_POLICIES:
                raise ValueError(f"{name} must be one of {BASIS_POLICIES}")
        if self.initial_states is not None:
            self.initial_states = [BellState(s) for s in self.initial_states]
            if len(self.initial_states) != self.n_message_pairs:
                raise ValueError("initial_states must list one Bell state per message pair")
        elif not self.randomize_initials:
            self.initial_states = [BellState.PHI_PLUS] * self.n_message_pairs


@dataclass
class MessageBits:
    alice_bits: list[EncodingOp]
    bob_bits: list[EncodingOp]

    def __post_init__(self):
        self.alice_bits = [EncodingOp.from_bits(b) for b in self.alice_bits]
        self.bob_bits = [EncodingOp.from_bits(b) for b in self.bob_bits]
        if len(self.alice_bits) != len(self.bob_bits):
            raise ValueError("Alice and Bob must send the same number of two-bit messages")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "MessageBits":
        ops = list(EncodingOp)
        codes = rng.integers(0, 4, size=2 * n)
        return cls([ops[c] for c in codes[:n]], [ops[c] for c in codes[n:]])


@dataclass
class SeqEntry:
    atom: int
    role: str  # payload | sample-bell | decoy-single
    origin: int


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    kind: str
    payload: Any

    def to_dict(self) -> dict:
        return {"sender": self.sender, "kind": self.kind, "payload": self.payload}


@dataclass
class SessionResult:
    aborted: bool
    abort_stage: str  # first-check | second-check | none
    first_check_error_rate: float | None
    second_check_error_rate: float | None
    alice_decoded: list[str]  # Bob's messages as read by Alice
    bob_decoded: list[str]  # Alice's messages as read by Bob
    transcript: list[ClassicalMessage]
    collections: list[str] = field(default_factory=list)
    first_check_flags: tuple[int, int] = (0, 0)  # (errors, checked)
    second_check_flags: tuple[int, int] = (0, 0)

    def to_dict(self) -> dict:
        return {
            "aborted": self.aborted,
            "abort_stage": self.abort_stage,
            "first_check_error_rate": self.first_check_error_rate,
            "second_check_error_rate": self.second_check_error_rate,
            "first_check_flags": list(self.first_check_flags),
            "second_check_flags": list(self.second_check_flags),
            "alice_decoded": list(self.alice_decoded),
            "bob_decoded": list(self.bob_decoded),
            "collections": list(self.collections),
            "transcript": [m.to_dict() for m in self.transcript],
        }


@dataclass
class AliceState:
    initials: list[BellState]
    pairs: list[tuple[int, int]]  # (A, B) handles, two per group
    seq_a: list[SeqEntry]
    sample_states: list[BellState] = field(default_factory=list)
    sample_positions: list[int] = field(default_factory=list)
    ops: list[EncodingOp] = field(default_factory=list)
    decoy_labels: list[AtomBasis] = field(default_factory=list)
    decoy_positions: list[int] = field(default_factory=list)
    decoded: list[EncodingOp] = field(default_factory=list)


@dataclass
class BobState:
    seq_b: list[SeqEntry] = field(default_factory=list)
    seq_a: list[SeqEntry] = field(default_factory=list)
    learned: list[BellState] = field(default_factory=list)
    fresh_pairs: list[tuple[int, int]] = field(default_factory=list)
    ops: list[EncodingOp] = field(default_factory=list)
    collections: list[Collection] = field(default_factory=list)
    decoded: list[EncodingOp] = field(default_factory=list)


class QuantumChannel:
    """Alice-to-Bob atom transport with an optional eavesdropper in the middle."""

    def __init__(self, register: Register, attack: AttackModel | None, rng):
        self.register = register
        self.attack = attack or AttackModel()
        self.rng = rng
        self.eve = EveRecord()

    def transmit(self, seq: list[SeqEntry], transmission: str) -> list[SeqEntry]:
        if not self.attack.targets(transmission):
            return [SeqEntry(e.atom, e.role, e.origin) for e in seq]
        forwarded = self.attack.tamper(self.register, [e.atom for e in seq], self.rng, self.eve)
        return [SeqEntry(a, e.role, e.origin) for a, e in zip(forwarded, seq)]


def _insert_randomly(payload: list[SeqEntry], extra: list[SeqEntry], rng) -> tuple[list[SeqEntry], list[int]]:
    total = len(payload) + len(extra)
    positions = sorted(int(p) for p in rng.choice(total, size=len(extra), replace=False)) if extra else []
    out: list[SeqEntry] = []
    pi = iter(payload)
    ei = iter(extra)
    pos = set(positions)
    for k in range(total):
        out.append(next(ei) if k in pos else next(pi))
    return out, positions


def strip_positions(seq: Sequence[SeqEntry], positions: Sequence[int]) -> list[SeqEntry]:
    drop = set(positions)
    return [e for k, e in enumerate(seq) if k not in drop]


def _pick_basis(policy: str, rng) -> MeasBasis:
    # one draw regardless of policy keeps the RNG stream aligned across configs
    u = rng.random()
    if policy == "Z":
        return MeasBasis.Z
    if policy == "X":
        return MeasBasis.X
    return MeasBasis.Z if u < 0.5 else MeasBasis.X


def _bits(op: EncodingOp) -> str:
    return op.value


class Session:
    """One protocol run between Alice and Bob over a possibly attacked channel."""

    def __init__(self, config: ProtocolConfig, attack: AttackModel | None = None, rng=None):
        self.config = config
        if rng is None or isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(config.rng_seed if rng is None else int(rng))
        self.rng = rng
        eve_rng = rng.spawn(1)[0]
        self.register = Register()
        self.channel = QuantumChannel(self.register, attack, eve_rng)
        self.transcript: list[ClassicalMessage] = []
        self.alice: AliceState | None = None
        self.bob = BobState()
        self.first_flags = (0, 0)
        self.second_flags = (0, 0)

    def _send(self, sender: str, kind: str, payload) -> None:
        self.transcript.append(ClassicalMessage(sender, kind, payload))

    # Step 1
    def step1_prepare(self) -> list[SeqEntry]:
        cfg, rng, reg = self.config, self.rng, self.register
        if cfg.randomize_initials:
            bells = list(BellState)
            initials = [bells[i] for i in rng.integers(0, 4, size=cfg.n_message_pairs)]
        else:
            initials = list(cfg.initial_states)
        pairs = []
        for s in initials:
            for _ in range(2):
                a, b = reg.add(s.to_vector())
                pairs.append((a, b))
        seq_a = [SeqEntry(a, "payload", k) for k, (a, _) in enumerate(pairs)]
        seq_b = [SeqEntry(b, "payload", k) for k, (_, b) in enumerate(pairs)]
        bells = list(BellState)
        sample_states = [bells[i] for i in rng.integers(0, 4, size=cfg.first_check_samples)]
        samples = [reg.add(s.to_vector()) for s in sample_states]
        seq_a, positions = _insert_randomly(
            seq_a, [SeqEntry(a, "sample-bell", k) for k, (a, _) in enumerate(samples)], rng
        )
        # same insertion positions in both sequences
        seq_b_full: list[SeqEntry] = []
        pi = iter(seq_b)
        si = iter(SeqEntry(b, "sample-bell", k) for k, (_, b) in enumerate(samples))
        for k in range(len(seq_a)):
            seq_b_full.append(next(si) if k in set(positions) else next(pi))
        self.alice = AliceState(initials, pairs, seq_a, sample_states, positions)
        return seq_b_full

    # Step 2
    def step2_first_check(self) -> tuple[float, bool]:
        alice, bob, reg, rng = self.alice, self.bob, self.register, self.rng
        self._send("Alice", "sample-positions", list(alice.sample_positions))
        bases = [_pick_basis(self.config.first_check_basis, rng) for _ in alice.sample_positions]
        bob_results = []
        for pos, basis in zip(alice.sample_positions, bases):
            rec = reg.measure([bob.seq_b[pos].atom], basis, rng)
            bob_results.append(rec.outcome[0])
        self._send("Bob", "basis-announcement", [b.value for b in bases])
        self._send("Bob", "measurement-results", [r.value for r in bob_results])
        errors = 0
        for k, (pos, basis) in enumerate(zip(alice.sample_positions, bases)):
            rec = reg.measure([alice.seq_a[pos].atom], basis, rng)
            same = rec.outcome[0] == bob_results[k]
            if same != bell_correlation(alice.sample_states[k], basis):
                errors += 1
        checked = len(alice.sample_positions)
        rate = errors / checked if checked else 0.0
        ok = rate <= self.config.error_threshold
        self.first_flags = (errors, checked)
        self._send("Alice", "check-verdict", {"check": "first", "error_rate": rate, "continue": ok})
        # discard measured sample atoms; payload order is restored
        measured = [alice.seq_a[p].atom for p in alice.sample_positions]
        measured += [bob.seq_b[p].atom for p in alice.sample_positions if bob.seq_b[p].atom in reg]
        reg.remove(measured)
        alice.seq_a = strip_positions(alice.seq_a, alice.sample_positions)
        bob.seq_b = strip_positions(bob.seq_b, alice.sample_positions)
        return rate, ok

    # Step 3
    def step3_alice_encode(self, ops: Sequence[EncodingOp]) -> list[SeqEntry]:
        alice, reg, rng, cfg = self.alice, self.register, self.rng, self.config
        alice.ops = [EncodingOp(o) for o in ops]
        for n, op in enumerate(alice.ops):
            a_first = alice.seq_a[2 * n].atom
            if op is not EncodingOp.U00:
                reg.apply(op.matrix, [a_first])
        labels = []
        for _ in range(cfg.second_check_samples):
            basis = _pick_basis(cfg.decoy_basis, rng)
            bit = int(rng.random() < 0.5)
            labels.append(basis.labels()[bit])
        decoys = [SeqEntry(reg.add(make_state([lab]))[0], "decoy-single", k) for k, lab in enumerate(labels)]
        seq, positions = _insert_randomly(alice.seq_a, decoys, rng)
        alice.decoy_labels = labels
        alice.decoy_positions = positions
        return seq

    # Step 4
    def step4_second_check(self) -> tuple[float, bool]:
        alice, bob, reg, rng = self.alice, self.bob, self.register, self.rng
        bases = [lab.basis for lab in alice.decoy_labels]
        self._send("Alice", "sample-positions", list(alice.decoy_positions))
        self._send("Alice", "basis-announcement", [b.value for b in bases])
        results = []
        for pos, basis in zip(alice.decoy_positions, bases):
            results.append(reg.measure([bob.seq_a[pos].atom], basis, rng).outcome[0])
        self._send("Bob", "measurement-results", [r.value for r in results])
        errors = sum(r != lab for r, lab in zip(results, alice.decoy_labels))
        checked = len(results)
        rate = errors / checked if checked else 0.0
        ok = rate <= self.config.error_threshold
        self.second_flags = (errors, checked)
        self._send("Alice", "check-verdict", {"check": "second", "error_rate": rate, "continue": ok})
        reg.remove([bob.seq_a[p].atom for p in alice.decoy_positions])
        bob.seq_a = strip_positions(bob.seq_a, alice.decoy_positions)
        return rate, ok

    # Step 5
    def step5_bob_encode(self, ops: Sequence[EncodingOp]) -> None:
        bob, reg, rng = self.bob, self.register, self.rng
        bob.ops = [EncodingOp(o) for o in ops]
        for n, op in enumerate(bob.ops):
            a2, b2 = bob.seq_a[2 * n + 1].atom, bob.seq_b[2 * n + 1].atom
            rec = reg.measure_bell([a2, b2], rng)
            learned = rec.outcome[0]
            reg.remove([a2, b2])
            new_a, new_b = reg.add(learned.to_vector())
            if op is not EncodingOp.U00:
                reg.apply(op.matrix, [new_b])
            bob.learned.append(learned)
            bob.fresh_pairs.append((new_a, new_b))

    # Step 6
    def step6_dialogue(self) -> None:
        alice, bob, reg, rng = self.alice, self.bob, self.register, self.rng
        g = cavity_gate()
        for n in range(len(bob.ops)):
            a1, b1 = bob.seq_a[2 * n].atom, bob.seq_b[2 * n].atom
            a2, b2 = bob.fresh_pairs[n]
            reg.apply(g, [a1, a2])
            reg.apply(g, [b1, b2])
            rec = reg.measure([a1, a2, b1, b2], MeasBasis.Z, rng)
            o = rec.outcome
            c = classify(ZOutcomePair((o[0], o[1]), (o[2], o[3])))
            reg.remove([a1, a2, b1, b2])
            bob.collections.append(c)
            bob.decoded.append(decode_peer_op(c, bob.learned[n], bob.ops[n], "bob"))
        self._send("Bob", "collection-announcement", [c.value for c in bob.collections])
        for n, c in enumerate(bob.collections):
            alice.decoded.append(decode_peer_op(c, alice.initials[n], alice.ops[n], "alice"))

    def _result(self, stage: str, first_rate, second_rate) -> SessionResult:
        aborted = stage != "none"
        return SessionResult(
            aborted=aborted,
            abort_stage=stage,
            first_check_error_rate=first_rate,
            second_check_error_rate=second_rate,
            alice_decoded=[] if aborted else [_bits(o) for o in self.alice.decoded],
            bob_decoded=[] if aborted else [_bits(o) for o in self.bob.decoded],
            transcript=list(self.transcript),
            collections=[] if aborted else [c.value for c in self.bob.collections],
            first_check_flags=self.first_flags,
            second_check_flags=self.second_flags,
        )

    def run(self, bits: MessageBits) -> SessionResult:
        if len(bits.alice_bits) != self.config.n_message_pairs:
            raise ValueError("message count does not match n_message_pairs")
        seq_b = self.step1_prepare()
        self.bob.seq_b = self.channel.transmit(seq_b, "first")
        self._send("Bob", "receipt", {"sequence": "first", "length": len(self.bob.seq_b)})
        r1, ok = self.step2_first_check()
        if not ok:
            log.debug("aborted at first check, error rate %.3f", r1)
            return self._result("first-check", r1, None)
        seq_a = self.step3_alice_encode(bits.alice_bits)
        self.bob.seq_a = self.channel.transmit(seq_a, "second")
        self._send("Bob", "receipt", {"sequence": "second", "length": len(self.bob.seq_a)})
        r2, ok = self.step4_second_check()
        if not ok:
            log.debug("aborted at second check, error rate %.3f", r2)
            return self._result("second-check", r1, r2)
        self.step5_bob_encode(bits.bob_bits)
        self.step6_dialogue()
        return self._result("none", r1, r2)


def run_session(config: ProtocolConfig, bits: MessageBits, attack: AttackModel | None = None, rng=None) -> SessionResult:
    """Execute steps one to six, aborting at the first failing security check."""
    return Session(config, attack, rng).run(bits)


__all__ = [
    "AttackKind",
    "ClassicalMessage",
    "MessageBits",
    "ProtocolConfig",
    "QuantumChannel",
    "SeqEntry",
    "Session",
    "SessionResult",
    "run_session",
    "strip_positions",
]
