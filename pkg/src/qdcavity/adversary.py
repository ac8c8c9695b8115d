"""Eavesdropper models for the quantum channel and the passive transcript listener."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from qdcavity.cavity import BellState, Collection, EncodingOp, bell_after_op, swap_collection
from qdcavity.quantum import SIGMA_X, AtomBasis, MeasBasis, Register, make_state


class AttackKind(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    MEASURE_RESEND = "measure_resend"
    ENTANGLE_MEASURE = "entangle_measure"
    PASSIVE = "passive"


CHANNELS = ("first", "second", "both")


@dataclass
class EveRecord:
    actions: list[tuple[int, str]] = field(default_factory=list)
    outcomes: list[tuple[int, str]] = field(default_factory=list)
    intercepted: list[int] = field(default_factory=list)
    ancillas: list[int] = field(default_factory=list)
    posterior: dict | None = None


@dataclass(frozen=True)
class AttackModel:
    """An eavesdropping strategy on one or both quantum transmissions.

    ``channel`` selects the transmission attacked: ``"first"`` is the sequence
    carrying the B atoms and first-check samples, ``"second"`` the encoded A
    atoms with decoys.
    """

    kind: AttackKind = AttackKind.NONE
    theta: float = 0.0
    channel: str = "first"

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if not 0.0 <= self.theta <= math.pi / 2 + 1e-15:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.theta))

    @property
    def beta(self) -> complex:
        return 1j * math.sin(self.theta)

    @property
    def zeta(self) -> float:
        return math.sin(self.theta) ** 2

    @property
    def active(self) -> bool:
        return self.kind not in (AttackKind.NONE, AttackKind.PASSIVE)

    def targets(self, transmission: str) -> bool:
        return self.active and self.channel in (transmission, "both")

    def analytic_detection(self, check_basis: str = "random") -> float:
        """Per-checked-atom probability of an error flag.

        ``check_basis`` is the basis policy of the attacked check: ``"Z"``,
        ``"X"`` or ``"random"`` (uniform per atom).
        """
        if not self.active:
            return 0.0
        if self.kind is AttackKind.INTERCEPT_RESEND:
            return 0.5
        if self.kind is AttackKind.MEASURE_RESEND:
            return {"Z": 0.25, "X": 0.25, "random": 0.25}[check_basis]
        # the attack unitary commutes with X-basis projectors on the atom
        return {"Z": self.zeta, "X": 0.0, "random": self.zeta / 2}[check_basis]

    def tamper(self, register: Register, atoms: Sequence[int], rng, record: EveRecord) -> list[int]:
        if self.kind is AttackKind.INTERCEPT_RESEND:
            return intercept_resend(register, atoms, rng, record)
        if self.kind is AttackKind.MEASURE_RESEND:
            return measure_resend(register, atoms, rng, record)
        if self.kind is AttackKind.ENTANGLE_MEASURE:
            return entangle_measure(register, atoms, self.theta, rng, record)
        return list(atoms)


def intercept_resend(register: Register, atoms: Sequence[int], rng, record: EveRecord) -> list[int]:
    """Keep the real atoms and forward fresh random Z eigenstates in their place."""
    forwarded = []
    for a in atoms:
        label = AtomBasis.G if rng.random() < 0.5 else AtomBasis.E
        (fake,) = register.add(make_state([label]))
        record.intercepted.append(a)
        record.actions.append((a, f"replaced:{label.value}"))
        forwarded.append(fake)
    return forwarded


def measure_resend(register: Register, atoms: Sequence[int], rng, record: EveRecord) -> list[int]:
    """Measure each atom in a uniformly random basis and forward it collapsed."""
    for a in atoms:
        basis = MeasBasis.Z if rng.random() < 0.5 else MeasBasis.X
        rec = register.measure([a], basis, rng)
        record.actions.append((a, f"measured:{basis.value}"))
        record.outcomes.append((a, rec.outcome[0].value))
    return list(atoms)


def entangle_unitary(theta: float) -> np.ndarray:
    """Atom-ancilla unitary cos(theta) I + i sin(theta) X(x)X.

    Acting on |x>|0> it gives cos(theta)|x>|0> + i sin(theta)|x'>|1>, the
    instantiation alpha = cos(theta), beta = i sin(theta), with the ancilla
    states for "unchanged" and "flipped" being |0> and |1>.
    """
    return math.cos(theta) * np.eye(4, dtype=complex) + 1j * math.sin(theta) * np.kron(SIGMA_X, SIGMA_X)


def entangle_measure(register: Register, atoms: Sequence[int], theta: float, rng, record: EveRecord) -> list[int]:
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    u = entangle_unitary(theta)
    for a in atoms:
        (anc,) = register.add(make_state([AtomBasis.G]))
        register.apply(u, [a, anc])
        record.ancillas.append(anc)
        record.actions.append((a, f"entangled:{anc}"))
    return list(atoms)


# -- passive listener -------------------------------------------------------

OpPair = tuple[EncodingOp, EncodingOp]


@dataclass(frozen=True)
class Posterior:
    distribution: dict[OpPair, Fraction]
    entropy_bits: float
    # posterior over (initial, alice_op, bob_op) before marginalizing the initial
    joint: dict[tuple[BellState, EncodingOp, EncodingOp], Fraction] = field(default_factory=dict)

    @property
    def joint_entropy_bits(self) -> float:
        return shannon_entropy(self.joint.values())


def uniform_prior(initials: Sequence[BellState] | None = None) -> dict[tuple[BellState, EncodingOp, EncodingOp], Fraction]:
    initials = list(BellState) if initials is None else [BellState(s) for s in initials]
    w = Fraction(1, len(initials) * 16)
    return {(s, ua, ub): w for s in initials for ua, ub in product(EncodingOp, repeat=2)}


def collection_of(initial: BellState, alice_op: EncodingOp, bob_op: EncodingOp) -> Collection:
    return swap_collection(bell_after_op(initial, alice_op, "A"), bell_after_op(initial, bob_op, "B"))


def shannon_entropy(probs) -> float:
    """Entropy in bits; exact when every probability is a power of one half."""
    exact = Fraction(0)
    approx = 0.0
    for p in probs:
        p = Fraction(p)
        if p == 0:
            continue
        if p.numerator == 1 and p.denominator & (p.denominator - 1) == 0:
            exact += p * (p.denominator.bit_length() - 1)
        else:
            approx -= float(p) * math.log2(float(p))
    return float(exact) + approx


def _announced(transcript, group: int) -> Collection:
    for msg in transcript:
        kind = msg["kind"] if isinstance(msg, Mapping) else msg.kind
        if kind == "collection-announcement":
            payload = msg["payload"] if isinstance(msg, Mapping) else msg.payload
            try:
                return Collection(payload[group])
            except (IndexError, ValueError, TypeError) as exc:
                raise ValueError(f"malformed collection announcement: {payload!r}") from exc
    raise ValueError("transcript has no collection announcement")


def passive_posterior(transcript, prior=None, group: int = 0) -> Posterior:
    """Bayesian posterior over (Alice op, Bob op) given the announced collection.

    ``prior`` maps (initial, alice_op, bob_op) to a weight and defaults to
    uniform over all 64 triples; the initial state is marginalized out.
    """
    c = transcript if isinstance(transcript, Collection) else _announced(transcript, group)
    prior = uniform_prior() if prior is None else prior
    triples: dict[tuple[BellState, EncodingOp, EncodingOp], Fraction] = {}
    for (s, ua, ub), w in prior.items():
        w = Fraction(w)
        if w and collection_of(s, ua, ub) is c:
            triples[(BellState(s), EncodingOp(ua), EncodingOp(ub))] = w
    total = sum(triples.values(), Fraction(0))
    if total == 0:
        raise ValueError(f"announced {c.value} has zero probability under the prior")
    marginal: dict[OpPair, Fraction] = {}
    for (s, ua, ub), w in triples.items():
        marginal[(ua, ub)] = marginal.get((ua, ub), Fraction(0)) + w / total
    dist = dict(sorted(marginal.items()))
    joint = {k: w / total for k, w in triples.items()}
    return Posterior(dist, shannon_entropy(dist.values()), joint)


def leaked_bits(prior=None) -> float:
    """Mutual information between the op pair and the announced collection."""
    prior = uniform_prior() if prior is None else prior
    p_ops: dict[OpPair, Fraction] = {}
    p_c: dict[Collection, Fraction] = {}
    for (s, ua, ub), w in prior.items():
        w = Fraction(w)
        p_ops[(ua, ub)] = p_ops.get((ua, ub), Fraction(0)) + w
        c = collection_of(s, ua, ub)
        p_c[c] = p_c.get(c, Fraction(0)) + w
    h_cond = sum(float(pc) * passive_posterior(c, prior).entropy_bits for c, pc in p_c.items() if pc)
    return shannon_entropy(p_ops.values()) - h_cond
