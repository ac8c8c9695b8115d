import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from printed import COLLECTIONS, COLUMNS, EVOLVED_FROM_PHI_PLUS, SWAP_TABLE, key_to_index
from qdcavity.cavity import (
    TABLE1,
    BellState,
    CavityParams,
    Collection,
    DecodeError,
    EncodingOp,
    ZOutcomePair,
    bell_after_op,
    cavity_evolve,
    cavity_gate,
    classify,
    classify_by_membership,
    decode_peer_op,
    outcome_distribution,
    regenerate_table,
    swap_collection,
)
from qdcavity.quantum import SIGMA_X, apply_gate, is_unitary, make_state

ROLES = ("alice", "bob")


def printed_vector(bell):
    v = np.zeros(16, dtype=complex)
    for key, amp in EVOLVED_FROM_PHI_PLUS[bell].items():
        v[key_to_index(key)] = amp
    return v


class TestGate:
    def test_matches_exponential_oracle(self):
        # independent construction: exp(-i pi/4 X(x)X)
        oracle = scipy.linalg.expm(-1j * math.pi / 4 * np.kron(SIGMA_X, SIGMA_X))
        assert np.max(np.abs(cavity_gate() - oracle)) < 1e-12

    def test_unitary(self):
        assert is_unitary(cavity_gate())

    def test_gg(self):
        out = apply_gate(make_state("gg"), cavity_gate(), [0, 1]).amplitudes
        assert np.allclose(out, np.array([1, 0, 0, -1j]) / math.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("cd", COLUMNS)
    def test_printed_evolution(self, cd):
        out = cavity_evolve(BellState.PHI_PLUS, BellState(cd)).amplitudes
        assert np.max(np.abs(out - printed_vector(cd))) < 1e-12

    def test_product_gate_solved_from_printed_data(self):
        # among the candidate gates (I + c X(x)X)/sqrt2, |c| = 1, only c = -i
        # reproduces all four printed evolutions
        hits = []
        for c in (1, -1, 1j, -1j):
            g = (np.eye(4) + c * np.kron(SIGMA_X, SIGMA_X)) / math.sqrt(2)
            ok = True
            for cd in COLUMNS:
                st = np.kron(BellState.PHI_PLUS.to_vector().amplitudes, BellState(cd).to_vector().amplitudes)
                st = np.kron(g, g) @ st.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)
                ok &= np.max(np.abs(st - printed_vector(cd))) < 1e-12
            if ok:
                hits.append(c)
        assert hits == [-1j]

    def test_other_operating_points_rejected(self):
        with pytest.raises(ValueError):
            CavityParams(lambda_t=0.3, omega_t=math.pi)
        with pytest.raises(ValueError):
            CavityParams(math.pi / 4, 2.0)
        assert CavityParams().lambda_t == pytest.approx(math.pi / 4)


class TestClassify:
    @pytest.mark.parametrize("key, label", [("gg.ee", "C0"), ("gg.gg", "C1"), ("eg.ee", "C3"), ("ee.ge", "C2")])
    def test_examples(self, key, label):
        assert classify(ZOutcomePair.parse(key)) is Collection(label)

    def test_closed_form_equals_membership(self):
        outs = ZOutcomePair.all()
        assert len(outs) == 16
        for o in outs:
            brute = [c for c, members in COLLECTIONS.items() if str(o) in members]
            assert len(brute) == 1
            assert classify(o).value == brute[0] == classify_by_membership(o).value


class TestTable:
    def test_stored_matches_printed(self):
        for row, labels in SWAP_TABLE.items():
            for col, label in zip(COLUMNS, labels):
                assert TABLE1[(BellState(row), BellState(col))].value == label

    def test_regenerated_matches_stored(self):
        assert regenerate_table() == TABLE1

    @pytest.mark.parametrize("ab, cd", list(itertools.product(BellState, repeat=2)))
    def test_uniform_quarter(self, ab, cd):
        dist = outcome_distribution(ab, cd)
        assert len(dist) == 4
        for o, p in dist.items():
            assert abs(p - 0.25) < 1e-12
            assert classify(o) is TABLE1[(ab, cd)]

    @pytest.mark.parametrize("ab, cd, label", [("PhiPlus", "PhiPlus", "C0"), ("PsiMinus", "PhiPlus", "C2"), ("PhiMinus", "PsiPlus", "C3")])
    def test_examples(self, ab, cd, label):
        assert swap_collection(BellState(ab), BellState(cd)).value == label

    def test_latin_square(self):
        for s in BellState:
            assert {TABLE1[(s, t)] for t in BellState} == set(Collection)
            assert {TABLE1[(t, s)] for t in BellState} == set(Collection)


class TestEncoding:
    def test_matrices(self):
        assert np.array_equal(EncodingOp.U00.matrix, np.eye(2))
        assert np.array_equal(EncodingOp.U01.matrix, [[0, 1], [1, 0]])
        assert np.array_equal(EncodingOp.U10.matrix, [[0, 1], [-1, 0]])
        assert np.array_equal(EncodingOp.U11.matrix, [[1, 0], [0, -1]])
        # U10 is i times sigma_y
        assert np.allclose(EncodingOp.U10.matrix, 1j * np.array([[0, -1j], [1j, 0]]))
        for op in EncodingOp:
            assert is_unitary(op.matrix)

    def test_bits(self):
        assert EncodingOp.from_bits((1, 0)) is EncodingOp.U10
        assert EncodingOp.U01.bits == (0, 1)

    def test_worked_example(self):
        assert bell_after_op(BellState.PSI_MINUS, EncodingOp.U01, "A") is BellState.PHI_MINUS
        assert bell_after_op(BellState.PSI_MINUS, EncodingOp.U10, "B") is BellState.PHI_PLUS

    @pytest.mark.parametrize("s", list(BellState))
    @pytest.mark.parametrize("slot", ["A", "B"])
    def test_bijection(self, s, slot):
        assert bell_after_op(s, EncodingOp.U00, slot) is s
        assert {bell_after_op(s, u, slot) for u in EncodingOp} == set(BellState)


class TestDecode:
    def test_worked_example(self):
        assert decode_peer_op(Collection.C1, BellState.PSI_MINUS, EncodingOp.U10, "Bob") is EncodingOp.U01
        assert decode_peer_op(Collection.C1, BellState.PSI_MINUS, EncodingOp.U01, "Alice") is EncodingOp.U10

    @pytest.mark.parametrize("s", list(BellState))
    def test_identity(self, s):
        c = swap_collection(s, s)
        for role in ROLES:
            assert decode_peer_op(c, s, EncodingOp.U00, role) is EncodingOp.U00

    def test_inverts_encoding(self):
        for s, ua, ub in itertools.product(BellState, EncodingOp, EncodingOp):
            c = swap_collection(bell_after_op(s, ua, "A"), bell_after_op(s, ub, "B"))
            assert decode_peer_op(c, s, ub, "bob") is ua
            assert decode_peer_op(c, s, ua, "alice") is ub

    def test_bad_role(self):
        with pytest.raises(ValueError):
            decode_peer_op(Collection.C0, BellState.PHI_PLUS, EncodingOp.U00, "eve")

    def test_decode_error_type(self):
        assert issubclass(DecodeError, RuntimeError)
