import numpy as np
import pytest

from qdcavity.cavity import BellState, EncodingOp
from qdcavity.quantum import (
    SIGMA_X,
    AtomBasis,
    MeasBasis,
    Register,
    StateVector,
    apply_gate,
    discard,
    equal_up_to_global_phase,
    is_unitary,
    make_state,
    measure,
    measure_bell,
    permute,
    reduced_density,
    tensor,
)

s = 1 / np.sqrt(2)


class TestMakeState:
    def test_computational(self):
        assert np.array_equal(make_state(["g", "g"]).amplitudes, [1, 0, 0, 0])

    def test_plus(self):
        assert np.allclose(make_state(["plus"]).amplitudes, [s, s], atol=1e-15)

    def test_g_plus(self):
        assert np.allclose(make_state(["g", "plus"]).amplitudes, [s, s, 0, 0], atol=1e-15)

    def test_minus_expansion(self):
        assert np.allclose(make_state([AtomBasis.MINUS]).amplitudes, [s, -s])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            make_state([])

    def test_bad_length_rejected(self):
        with pytest.raises(ValueError):
            StateVector(np.ones(3))

    def test_immutable(self):
        st = make_state(["g"])
        with pytest.raises(ValueError):
            st.amplitudes[0] = 0


class TestTensor:
    def test_g_e(self):
        assert np.array_equal(tensor(make_state("g"), make_state("e")).amplitudes, [0, 1, 0, 0])

    def test_phi_plus_squared(self):
        phi = BellState.PHI_PLUS.to_vector()
        t = tensor(phi, phi)
        assert t.num_atoms == 4
        expected = np.zeros(16)
        for bits in ("0000", "0011", "1100", "1111"):
            expected[int(bits, 2)] = 0.5
        assert np.allclose(t.amplitudes, expected, atol=1e-15)
        assert abs(t.norm() - 1) < 1e-12


class TestApplyGate:
    def test_flip(self):
        out = apply_gate(make_state("gg"), SIGMA_X, [0])
        assert np.array_equal(out.amplitudes, make_state("eg").amplitudes)

    def test_identity(self, rng):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        st = StateVector(v / np.linalg.norm(v))
        assert np.allclose(apply_gate(st, np.eye(2), [1]).amplitudes, st.amplitudes)

    def test_isigma_y_on_b(self):
        out = apply_gate(BellState.PSI_MINUS.to_vector(), EncodingOp.U10.matrix, [1])
        assert equal_up_to_global_phase(out, BellState.PHI_PLUS.to_vector())

    def test_errors(self):
        st = make_state("gg")
        with pytest.raises(IndexError):
            apply_gate(st, SIGMA_X, [2])
        with pytest.raises(ValueError):
            apply_gate(st, SIGMA_X, [0, 1])
        with pytest.raises(ValueError):
            apply_gate(st, np.eye(4), [0, 0])


class TestMeasure:
    def test_eigenstate(self, rng):
        rec, post = measure(make_state("gg"), [0, 1], "Z", rng)
        assert rec.outcome == (AtomBasis.G, AtomBasis.G)
        assert rec.probability == pytest.approx(1.0, abs=1e-12)

    def test_phi_plus_z_correlated(self, rng):
        counts = {}
        for _ in range(400):
            rec, post = measure(BellState.PHI_PLUS.to_vector(), [0, 1], "Z", rng)
            counts[rec.outcome] = counts.get(rec.outcome, 0) + 1
            assert abs(rec.probability - 0.5) < 1e-12
            assert abs(post.norm() - 1) < 1e-12
        assert set(counts) == {(AtomBasis.G, AtomBasis.G), (AtomBasis.E, AtomBasis.E)}

    def test_psi_minus_x_anticorrelated(self, rng):
        for _ in range(200):
            rec, _ = measure(BellState.PSI_MINUS.to_vector(), [0, 1], "X", rng)
            assert rec.outcome[0] != rec.outcome[1]

    @pytest.mark.parametrize("bell", list(BellState))
    @pytest.mark.parametrize("basis", ["Z", "X"])
    def test_born_completeness(self, bell, basis):
        # summing the recorded probability over every outcome reached gives 1
        seen = {}
        r = np.random.default_rng(3)
        for _ in range(200):
            rec, _ = measure(bell.to_vector(), [0, 1], basis, r)
            seen[rec.outcome] = rec.probability
        assert abs(sum(seen.values()) - 1) < 1e-12

    def test_x_eigenstate(self, rng):
        rec, post = measure(make_state(["plus"]), [0], MeasBasis.X, rng)
        assert rec.outcome == (AtomBasis.PLUS,)
        assert equal_up_to_global_phase(post, make_state(["plus"]))

    def test_index_error(self, rng):
        with pytest.raises(IndexError):
            measure(make_state("g"), [1], "Z", rng)

    def test_determinism(self):
        def run(seed):
            r = np.random.default_rng(seed)
            return [measure(BellState.PSI_PLUS.to_vector(), [0, 1], "Z", r)[0] for _ in range(20)]
        assert run(9) == run(9)


class TestMeasureBell:
    @pytest.mark.parametrize("bell", list(BellState))
    def test_eigenstates(self, bell, rng):
        rec, post = measure_bell(bell.to_vector(), [0, 1], rng)
        assert rec.outcome == (bell,)
        assert abs(rec.probability - 1) < 1e-12

    def test_gg_splits(self):
        # oracle: |<Phi+-|gg>|^2 computed directly
        gg = make_state("gg")
        for bell in BellState:
            p = abs(np.vdot(bell.to_vector().amplitudes, gg.amplitudes)) ** 2
            assert p == pytest.approx(0.5 if bell.value.startswith("Phi") else 0.0, abs=1e-12)
        r = np.random.default_rng(0)
        outs = {measure_bell(gg, [0, 1], r)[0].outcome[0] for _ in range(100)}
        assert outs == {BellState.PHI_PLUS, BellState.PHI_MINUS}

    def test_encoded_pair(self, rng):
        encoded = apply_gate(BellState.PSI_MINUS.to_vector(), SIGMA_X, [0])
        rec, _ = measure_bell(tensor(make_state("g"), encoded), [1, 2], rng)
        assert rec.outcome == (BellState.PHI_MINUS,)

    def test_post_state_is_bell(self, rng):
        st = tensor(make_state("gg"), make_state("e"))
        rec, post = measure_bell(st, [0, 1], rng)
        expect = tensor(rec.outcome[0].to_vector(), make_state("e"))
        assert equal_up_to_global_phase(post, expect)

    def test_needs_two(self, rng):
        with pytest.raises(ValueError):
            measure_bell(make_state("ggg"), [0, 1, 2], rng)


class TestReducedDensity:
    @pytest.mark.parametrize("bell", list(BellState))
    @pytest.mark.parametrize("atom", [0, 1])
    def test_bell_maximally_mixed(self, bell, atom):
        rho = reduced_density(bell.to_vector(), [atom])
        assert np.max(np.abs(rho - np.eye(2) / 2)) < 1e-12

    def test_product(self):
        rho = reduced_density(make_state("ge"), [0])
        assert np.allclose(rho, [[1, 0], [0, 0]])

    def test_trace_and_hermitian(self, rng):
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        st = StateVector(v / np.linalg.norm(v))
        rho = reduced_density(st, [2, 0])
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.allclose(rho, rho.conj().T)


class TestPhase:
    def test_sign(self):
        phi = BellState.PHI_MINUS.to_vector()
        assert equal_up_to_global_phase(phi, StateVector(-phi.amplitudes))

    def test_orthogonal(self):
        assert not equal_up_to_global_phase(BellState.PHI_PLUS.to_vector(), BellState.PHI_MINUS.to_vector())

    def test_literal_minus_sign(self):
        v = apply_gate(BellState.PSI_MINUS.to_vector(), SIGMA_X, [0])
        assert np.allclose(v.amplitudes, -BellState.PHI_MINUS.to_vector().amplitudes)
        assert equal_up_to_global_phase(v, BellState.PHI_MINUS.to_vector())

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            equal_up_to_global_phase(make_state("g"), make_state("gg"))


def test_bell_orthonormal():
    vecs = [b.to_vector().amplitudes for b in BellState]
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.max(np.abs(gram - np.eye(4))) < 1e-12


@pytest.mark.parametrize(
    "bell, signs, phase",
    [
        # X-basis rewriting as printed: coefficients on ++, +-, -+, --
        (BellState.PHI_PLUS, (1, 0, 0, 1), 1),
        (BellState.PHI_MINUS, (0, 1, 1, 0), 1),
        (BellState.PSI_PLUS, (1, 0, 0, -1), 1),
        # (|+->-|-+>)/sqrt2 expands to (|eg>-|ge>)/sqrt2, a global -1 off
        (BellState.PSI_MINUS, (0, 1, -1, 0), -1),
    ],
)
def test_x_basis_rewriting(bell, signs, phase):
    labels = [("plus", "plus"), ("plus", "minus"), ("minus", "plus"), ("minus", "minus")]
    vec = sum(c * make_state(list(l)).amplitudes for c, l in zip(signs, labels)) * s
    assert np.max(np.abs(vec - phase * bell.to_vector().amplitudes)) < 1e-12
    assert equal_up_to_global_phase(StateVector(vec), bell.to_vector())


def test_permute_and_discard():
    st = tensor(make_state("e"), BellState.PHI_PLUS.to_vector())
    moved = permute(st, [1, 0, 2])
    assert np.allclose(reduced_density(moved, [1]), [[0, 0], [0, 1]])
    rest = discard(st, [0])
    assert equal_up_to_global_phase(rest, BellState.PHI_PLUS.to_vector())
    with pytest.raises(ValueError):
        discard(st, [1])


def test_unitarity_helper():
    assert is_unitary(EncodingOp.U10.matrix)
    assert not is_unitary(np.ones((2, 2)))


class TestRegister:
    def test_blocks_merge_only_when_needed(self, rng):
        reg = Register()
        a = reg.add(BellState.PHI_PLUS.to_vector())
        b = reg.add(BellState.PSI_MINUS.to_vector())
        assert reg.max_block_atoms() == 2
        reg.apply(np.eye(4), [a[0], b[0]])
        assert reg.max_block_atoms() == 4

    def test_measure_and_remove(self, rng):
        reg = Register()
        a, b = reg.add(BellState.PHI_PLUS.to_vector())
        rec = reg.measure([a], "Z", rng)
        reg.remove([a])
        rho = reg.reduced_density([b])
        expected = np.diag([1, 0]) if rec.outcome[0] is AtomBasis.G else np.diag([0, 1])
        assert np.allclose(rho, expected)
        assert a not in reg

    def test_missing_atom(self):
        with pytest.raises(IndexError):
            Register().measure([0], "Z", np.random.default_rng(0))
