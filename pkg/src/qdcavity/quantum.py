"""Dense state-vector simulation of small registers of two-level atoms.

Ordering convention: atom 0 is the most significant bit of the basis index,
``|g>`` maps to bit 0 and ``|e>`` to bit 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from qdcavity import kernels

TOL = 1e-12
MAX_ATOMS = 12

SQRT1_2 = 1.0 / np.sqrt(2.0)


class AtomBasis(str, Enum):
    G = "g"
    E = "e"
    PLUS = "plus"
    MINUS = "minus"

    @property
    def basis(self) -> "MeasBasis":
        return MeasBasis.Z if self in (AtomBasis.G, AtomBasis.E) else MeasBasis.X

    @property
    def bit(self) -> int:
        # index of this label within its own basis
        return 0 if self in (AtomBasis.G, AtomBasis.PLUS) else 1

    def vector(self) -> np.ndarray:
        return _KETS[self].copy()


class MeasBasis(str, Enum):
    Z = "Z"
    X = "X"
    BELL = "Bell"

    def labels(self) -> tuple[AtomBasis, AtomBasis]:
        if self is MeasBasis.Z:
            return (AtomBasis.G, AtomBasis.E)
        if self is MeasBasis.X:
            return (AtomBasis.PLUS, AtomBasis.MINUS)
        raise ValueError("Bell basis has no single-atom labels")


_KETS = {
    AtomBasis.G: np.array([1.0, 0.0], dtype=complex),
    AtomBasis.E: np.array([0.0, 1.0], dtype=complex),
    AtomBasis.PLUS: np.array([SQRT1_2, SQRT1_2], dtype=complex),
    AtomBasis.MINUS: np.array([SQRT1_2, -SQRT1_2], dtype=complex),
}

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def is_unitary(u: np.ndarray, tol: float = TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and bool(
        np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < tol
    )


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of ``num_atoms`` two-level atoms.

    Treated as an immutable value: every operation returns a new instance.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        n = int(round(np.log2(amps.shape[0]))) if amps.shape[0] else -1
        if amps.ndim != 1 or n < 0 or amps.shape[0] != 1 << n:
            raise ValueError("amplitude length must be a power of two")
        if n > MAX_ATOMS:
            raise ValueError(f"register of {n} atoms exceeds limit of {MAX_ATOMS}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_atoms(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy_amplitudes(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=np.complex128, copy=True)

    def __len__(self):
        return self.num_atoms

    def __repr__(self):
        return f"StateVector(num_atoms={self.num_atoms}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True)
class MeasurementRecord:
    atom_indices: tuple[int, ...]
    basis: MeasBasis
    outcome: tuple  # tuple of AtomBasis, or (BellState,) for Bell measurements
    probability: float


def make_state(kets: Sequence[AtomBasis | str]) -> StateVector:
    if not kets:
        raise ValueError("need at least one atom label")
    amps = np.array([1.0], dtype=complex)
    for k in kets:
        amps = np.kron(amps, AtomBasis(k).vector())
    return StateVector(amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def _check_indices(state: StateVector, idx: Sequence[int]) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != len(idx):
        raise ValueError(f"atom indices must be distinct: {idx}")
    for i in idx:
        if not 0 <= i < state.num_atoms:
            raise IndexError(f"atom index {i} out of range for {state.num_atoms} atoms")
    return idx


def apply_gate(state: StateVector, gate: np.ndarray, targets: Sequence[int]) -> StateVector:
    """Apply a one- or two-atom unitary to ``targets`` (identity elsewhere)."""
    targets = _check_indices(state, targets)
    gate = np.ascontiguousarray(gate, dtype=np.complex128)
    if gate.shape != (1 << len(targets),) * 2:
        raise ValueError(f"gate of shape {gate.shape} does not act on {len(targets)} atom(s)")
    psi = state.copy_amplitudes()
    n = state.num_atoms
    if len(targets) == 1:
        kernels.apply_1q(psi, gate, n, targets[0])
    elif len(targets) == 2:
        kernels.apply_2q(psi, gate, n, targets[0], targets[1])
    else:
        raise ValueError("only one- and two-atom gates are supported")
    return StateVector(psi)


def permute(state: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder atoms: new atom ``k`` is old atom ``order[k]``."""
    order = _check_indices(state, order)
    if len(order) != state.num_atoms:
        raise ValueError("permutation must list every atom exactly once")
    n = state.num_atoms
    t = state.amplitudes.reshape((2,) * n)
    return StateVector(np.transpose(t, order).reshape(-1))


def _born_sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    # exactly one uniform draw per measurement keeps RNG consumption fixed
    u = rng.random() * float(probs.sum())
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    idx = min(idx, len(probs) - 1)
    while probs[idx] <= 0.0:
        idx -= 1
    return idx


def measure(
    state: StateVector,
    atom_indices: Sequence[int],
    basis: MeasBasis | str,
    rng: np.random.Generator,
) -> tuple[MeasurementRecord, StateVector]:
    """Projective Z or X measurement of the given atoms (no register compaction)."""
    idx = _check_indices(state, atom_indices)
    basis = MeasBasis(basis)
    if basis is MeasBasis.BELL:
        raise ValueError("use measure_bell for Bell-basis measurement")
    n = state.num_atoms
    psi = state.copy_amplitudes()
    if basis is MeasBasis.X:
        for a in idx:
            kernels.apply_1q(psi, HADAMARD, n, a)
    targets = np.array(idx, dtype=np.int64)
    probs = kernels.marginal_probs(psi, n, targets)
    outcome = _born_sample(probs, rng)
    weight = kernels.collapse(psi, n, targets, outcome)
    if basis is MeasBasis.X:
        for a in idx:
            kernels.apply_1q(psi, HADAMARD, n, a)
    k = len(idx)
    labels = basis.labels()
    bits = [(outcome >> (k - 1 - j)) & 1 for j in range(k)]
    rec = MeasurementRecord(idx, basis, tuple(labels[b] for b in bits), weight)
    return rec, StateVector(psi)


def measure_bell(state: StateVector, pair: Sequence[int], rng: np.random.Generator):
    """Bell-basis measurement of two atoms; returns (record, post-state).

    The record's outcome is a one-element tuple holding the BellState.
    """
    from qdcavity.cavity import BellState

    if len(pair) != 2:
        raise ValueError(f"Bell measurement needs exactly two atoms, got {len(pair)}")
    a, b = _check_indices(state, pair)
    n = state.num_atoms
    psi = state.copy_amplitudes()
    # rotate Bell basis onto Z basis: Phi+ -> 00, Psi+ -> 01, Phi- -> 10, Psi- -> 11
    kernels.apply_2q(psi, CNOT, n, a, b)
    kernels.apply_1q(psi, HADAMARD, n, a)
    targets = np.array([a, b], dtype=np.int64)
    probs = kernels.marginal_probs(psi, n, targets)
    outcome = _born_sample(probs, rng)
    weight = kernels.collapse(psi, n, targets, outcome)
    kernels.apply_1q(psi, HADAMARD, n, a)
    kernels.apply_2q(psi, CNOT, n, a, b)
    bell = _BELL_FROM_BITS[outcome]
    return MeasurementRecord((a, b), MeasBasis.BELL, (BellState(bell),), weight), StateVector(psi)


_BELL_FROM_BITS = {0: "PhiPlus", 1: "PsiPlus", 2: "PhiMinus", 3: "PsiMinus"}


def reduced_density(state: StateVector, atom_indices: Sequence[int]) -> np.ndarray:
    """Partial trace over every atom not listed; rows follow ``atom_indices`` order."""
    keep = _check_indices(state, atom_indices)
    n = state.num_atoms
    rest = [a for a in range(n) if a not in keep]
    t = state.amplitudes.reshape((2,) * n)
    m = np.transpose(t, list(keep) + rest).reshape(1 << len(keep), -1)
    return m @ m.conj().T


def discard(state: StateVector, atom_indices: Sequence[int], tol: float = 1e-9) -> StateVector:
    """Remove atoms that are in a product state with the rest of the register."""
    drop = _check_indices(state, atom_indices)
    n = state.num_atoms
    keep = [a for a in range(n) if a not in drop]
    if not keep:
        raise ValueError("cannot discard every atom")
    t = state.amplitudes.reshape((2,) * n)
    m = np.transpose(t, list(drop) + keep).reshape(1 << len(drop), -1)
    row = m[int(np.argmax(np.linalg.norm(m, axis=1)))]
    kept = row / np.linalg.norm(row)
    dropped = m @ kept.conj()
    if np.max(np.abs(np.outer(dropped, kept) - m)) > tol:
        raise ValueError(f"atoms {drop} are entangled with the rest of the register")
    return StateVector(kept)


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.num_atoms != b.num_atoms:
        raise ValueError("states have different numbers of atoms")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = TOL) -> bool:
    return abs(overlap(a, b)) >= 1.0 - tol


class Register:
    """A register of atoms addressed by stable integer handles.

    Atoms are kept in independent product blocks; blocks merge only when an
    operation spans more than one of them, so a session of many unentangled
    pairs never builds an exponentially large vector.
    """

    def __init__(self):
        self._blocks: dict[int, tuple[list[int], StateVector]] = {}
        self._where: dict[int, int] = {}
        self._next_atom = 0
        self._next_block = 0

    def __contains__(self, atom):
        return atom in self._where

    @property
    def atoms(self) -> list[int]:
        return sorted(self._where)

    def add(self, state: StateVector) -> list[int]:
        ids = list(range(self._next_atom, self._next_atom + state.num_atoms))
        self._next_atom += state.num_atoms
        bid = self._next_block
        self._next_block += 1
        self._blocks[bid] = (ids, state)
        for a in ids:
            self._where[a] = bid
        return ids

    def _lookup(self, atom: int) -> int:
        try:
            return self._where[atom]
        except KeyError:
            raise IndexError(f"atom {atom} is not in the register") from None

    def _gather(self, atoms: Sequence[int]) -> tuple[int, list[int], StateVector]:
        """Merge every block touched by ``atoms`` into one and return it."""
        bids = []
        for a in atoms:
            b = self._lookup(a)
            if b not in bids:
                bids.append(b)
        if len(bids) == 1:
            ids, st = self._blocks[bids[0]]
            return bids[0], ids, st
        ids, st = self._blocks.pop(bids[0])
        ids = list(ids)
        for b in bids[1:]:
            more, other = self._blocks.pop(b)
            st = tensor(st, other)
            ids.extend(more)
        bid = bids[0]
        self._blocks[bid] = (ids, st)
        for a in ids:
            self._where[a] = bid
        return bid, ids, st

    def block_of(self, atoms: Sequence[int]) -> tuple[list[int], StateVector]:
        _, ids, st = self._gather(atoms)
        return list(ids), st

    def apply(self, gate: np.ndarray, atoms: Sequence[int]) -> None:
        bid, ids, st = self._gather(atoms)
        self._blocks[bid] = (ids, apply_gate(st, gate, [ids.index(a) for a in atoms]))

    def measure(self, atoms: Sequence[int], basis, rng) -> MeasurementRecord:
        bid, ids, st = self._gather(atoms)
        rec, post = measure(st, [ids.index(a) for a in atoms], basis, rng)
        self._blocks[bid] = (ids, post)
        return MeasurementRecord(tuple(atoms), rec.basis, rec.outcome, rec.probability)

    def measure_bell(self, pair: Sequence[int], rng) -> MeasurementRecord:
        bid, ids, st = self._gather(pair)
        rec, post = measure_bell(st, [ids.index(a) for a in pair], rng)
        self._blocks[bid] = (ids, post)
        return MeasurementRecord(tuple(pair), rec.basis, rec.outcome, rec.probability)

    def reduced_density(self, atoms: Sequence[int]) -> np.ndarray:
        bid, ids, st = self._gather(atoms)
        return reduced_density(st, [ids.index(a) for a in atoms])

    def remove(self, atoms: Sequence[int]) -> None:
        """Drop atoms that are unentangled with the rest of their block."""
        by_block: dict[int, list[int]] = {}
        for a in atoms:
            by_block.setdefault(self._lookup(a), []).append(a)
        for bid, drop in by_block.items():
            ids, st = self._blocks[bid]
            keep = [a for a in ids if a not in drop]
            if keep:
                self._blocks[bid] = (keep, discard(st, [ids.index(a) for a in drop]))
            else:
                del self._blocks[bid]
            for a in drop:
                del self._where[a]

    def max_block_atoms(self) -> int:
        return max((len(ids) for ids, _ in self._blocks.values()), default=0)
