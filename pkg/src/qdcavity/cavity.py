"""Cavity two-atom gate, outcome collections, the swapping table and decoding."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product

import numpy as np

from qdcavity.quantum import (
    I2,
    SIGMA_X,
    SIGMA_Z,
    SQRT1_2,
    AtomBasis,
    StateVector,
    apply_gate,
    equal_up_to_global_phase,
    permute,
    tensor,
)


class BellState(str, Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    def to_vector(self) -> StateVector:
        return StateVector(_BELL_AMPS[self])

    @property
    def symbol(self) -> str:
        return {"PhiPlus": "Φ+", "PhiMinus": "Φ-", "PsiPlus": "Ψ+", "PsiMinus": "Ψ-"}[self.value]


_BELL_AMPS = {
    BellState.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * SQRT1_2,
    BellState.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * SQRT1_2,
    BellState.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * SQRT1_2,
    BellState.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * SQRT1_2,
}

# Table row/column order as printed.
TABLE_ORDER = (BellState.PSI_PLUS, BellState.PSI_MINUS, BellState.PHI_PLUS, BellState.PHI_MINUS)


def bell_correlation(state: BellState, basis) -> bool:
    """True when both atoms give equal labels in ``basis`` (Z or X)."""
    basis = getattr(basis, "value", basis)
    if basis == "Z":
        return state in (BellState.PHI_PLUS, BellState.PHI_MINUS)
    if basis == "X":
        return state in (BellState.PHI_PLUS, BellState.PSI_PLUS)
    raise ValueError(f"no correlation rule for basis {basis!r}")


class EncodingOp(str, Enum):
    U00 = "00"
    U01 = "01"
    U10 = "10"
    U11 = "11"

    @property
    def bits(self) -> tuple[int, int]:
        return int(self.value[0]), int(self.value[1])

    @classmethod
    def from_bits(cls, bits) -> "EncodingOp":
        if isinstance(bits, str):
            return cls(bits)
        i, j = bits
        return cls(f"{int(i)}{int(j)}")

    @property
    def matrix(self) -> np.ndarray:
        return _ENC_MATS[self].copy()


_ENC_MATS = {
    EncodingOp.U00: I2,
    EncodingOp.U01: SIGMA_X,
    # i*sigma_y = |g><e| - |e><g|
    EncodingOp.U10: np.array([[0, 1], [-1, 0]], dtype=complex),
    EncodingOp.U11: SIGMA_Z,
}


@dataclass(frozen=True)
class CavityParams:
    lambda_t: float = math.pi / 4
    omega_t: float = math.pi

    def __post_init__(self):
        if not (math.isclose(self.lambda_t, math.pi / 4, abs_tol=1e-12)
                and math.isclose(self.omega_t, math.pi, abs_tol=1e-12)):
            raise ValueError(
                "only the operating point lambda*t = pi/4, Omega*t = pi is supported, "
                f"got lambda*t={self.lambda_t}, Omega*t={self.omega_t}"
            )


class Collection(str, Enum):
    C0 = "C0"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"

    @property
    def index(self) -> int:
        return int(self.value[1])


@dataclass(frozen=True)
class ZOutcomePair:
    """Z outcomes of the first-cavity atoms (``ac``) and second-cavity atoms (``bd``)."""

    ac: tuple[AtomBasis, AtomBasis]
    bd: tuple[AtomBasis, AtomBasis]

    @classmethod
    def parse(cls, text: str) -> "ZOutcomePair":
        """Parse ``"gg.ee"`` style notation."""
        ac, bd = text.split(".")
        return cls(tuple(AtomBasis(c) for c in ac), tuple(AtomBasis(c) for c in bd))

    def __str__(self):
        return "".join(x.value for x in self.ac) + "." + "".join(x.value for x in self.bd)

    @classmethod
    def all(cls) -> list["ZOutcomePair"]:
        z = (AtomBasis.G, AtomBasis.E)
        return [cls((a, c), (b, d)) for a, c, b, d in product(z, repeat=4)]


@lru_cache(maxsize=None)
def _gate_matrix() -> np.ndarray:
    # G|xy> = (|xy> - i|x'y'>)/sqrt2 with x' the flipped level
    g = (np.eye(4, dtype=complex) - 1j * np.kron(SIGMA_X, SIGMA_X)) * SQRT1_2
    g.setflags(write=False)
    return g


def cavity_gate(params: CavityParams | None = None) -> np.ndarray:
    """Two-atom evolution of one driven cavity at the supported operating point."""
    if params is None:
        params = CavityParams()
    elif not isinstance(params, CavityParams):
        raise TypeError("params must be CavityParams")
    return _gate_matrix().copy()


def cavity_evolve(ab: StateVector | BellState, cd: StateVector | BellState) -> StateVector:
    """Run both cavities on pairs AB and CD; result is ordered (A, C, B, D)."""
    if isinstance(ab, BellState):
        ab = ab.to_vector()
    if isinstance(cd, BellState):
        cd = cd.to_vector()
    g = _gate_matrix()
    state = tensor(ab, cd)  # atoms A, B, C, D
    state = apply_gate(state, g, (0, 2))
    state = apply_gate(state, g, (1, 3))
    return permute(state, (0, 2, 1, 3))


# Membership sets, transcribed as printed (ac.bd).
COLLECTION_SETS: dict[Collection, frozenset[str]] = {
    Collection.C0: frozenset({"gg.ee", "ee.gg", "ge.eg", "eg.ge"}),
    Collection.C1: frozenset({"gg.gg", "ee.ee", "ge.ge", "eg.eg"}),
    Collection.C2: frozenset({"gg.eg", "ee.ge", "ge.ee", "eg.gg"}),
    Collection.C3: frozenset({"gg.ge", "ee.eg", "ge.gg", "eg.ee"}),
}


def classify(outcomes: ZOutcomePair) -> Collection:
    a, c = outcomes.ac
    b, d = outcomes.bd
    same_ab = a == b
    same_cd = c == d
    if not same_ab and not same_cd:
        return Collection.C0
    if same_ab and same_cd:
        return Collection.C1
    if not same_ab:
        return Collection.C2
    return Collection.C3


def classify_by_membership(outcomes: ZOutcomePair) -> Collection:
    key = str(outcomes)
    hits = [c for c, members in COLLECTION_SETS.items() if key in members]
    if len(hits) != 1:
        raise ValueError(f"{key} belongs to {len(hits)} collections")
    return hits[0]


_T = BellState
# Swapping table as printed: rows are the AB state, columns the CD state.
TABLE1: dict[tuple[BellState, BellState], Collection] = {
    (row, col): Collection(label)
    for row, labels in (
        (_T.PSI_PLUS, ("C1", "C0", "C3", "C2")),
        (_T.PSI_MINUS, ("C0", "C1", "C2", "C3")),
        (_T.PHI_PLUS, ("C2", "C3", "C0", "C1")),
        (_T.PHI_MINUS, ("C3", "C2", "C1", "C0")),
    )
    for col, label in zip(TABLE_ORDER, labels)
}


def outcome_distribution(ab: BellState, cd: BellState, tol: float = 1e-12) -> dict[ZOutcomePair, float]:
    """Nonzero Z-outcome probabilities after the cavity evolution of ``ab`` and ``cd``."""
    amps = cavity_evolve(ab, cd).amplitudes
    z = (AtomBasis.G, AtomBasis.E)
    out = {}
    for idx, amp in enumerate(amps):
        p = abs(amp) ** 2
        if p > tol:
            a, c, b, d = (z[(idx >> s) & 1] for s in (3, 2, 1, 0))
            out[ZOutcomePair((a, c), (b, d))] = p
    return out


def regenerate_table() -> dict[tuple[BellState, BellState], Collection]:
    """Rebuild the swapping table by simulation; fails if any pair spans two collections."""
    table = {}
    for ab, cd in product(BellState, repeat=2):
        colls = {classify(o) for o in outcome_distribution(ab, cd)}
        if len(colls) != 1:
            raise RuntimeError(f"{ab.value}x{cd.value} spreads over collections {sorted(colls)}")
        table[(ab, cd)] = colls.pop()
    return table


def swap_collection(ab: BellState, cd: BellState) -> Collection:
    return TABLE1[(BellState(ab), BellState(cd))]


@lru_cache(maxsize=None)
def bell_after_op(s: BellState, op: EncodingOp, which_atom: str) -> BellState:
    """Bell state, up to global phase, after ``op`` acts on atom ``"A"`` or ``"B"`` of ``s``."""
    target = {"A": 0, "B": 1}[which_atom]
    v = apply_gate(BellState(s).to_vector(), EncodingOp(op).matrix, (target,))
    for cand in BellState:
        if equal_up_to_global_phase(v, cand.to_vector()):
            return cand
    raise AssertionError("encoding left the Bell basis")


class DecodeError(RuntimeError):
    pass


def decode_peer_op(c: Collection, initial: BellState, my_op: EncodingOp, my_role: str) -> EncodingOp:
    """Recover the other party's encoding from the announced collection.

    Alice's op acts on atom A of the first pair, Bob's on atom B of the second;
    both pairs start in ``initial``.
    """
    c = Collection(c)
    role = my_role.lower()
    if role not in ("alice", "bob"):
        raise ValueError(f"unknown role {my_role!r}")
    hits = []
    for u in EncodingOp:
        if role == "bob":
            pair1 = bell_after_op(initial, u, "A")
            pair2 = bell_after_op(initial, my_op, "B")
        else:
            pair1 = bell_after_op(initial, my_op, "A")
            pair2 = bell_after_op(initial, u, "B")
        if swap_collection(pair1, pair2) is c:
            hits.append(u)
    if len(hits) != 1:
        raise DecodeError(f"{len(hits)} peer operations consistent with {c.value}")
    return hits[0]
