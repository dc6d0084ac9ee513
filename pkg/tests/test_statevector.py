from __future__ import annotations

import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uccdecomp import kernels
from uccdecomp.circuit import CNOT, MCRZ, RX, RZ, Circuit, H, X, unitary
from uccdecomp.fermion import ExcitationOperator, JwConvention, OperatorError, apply_excitation
from uccdecomp.pauli import DimensionCapError
from uccdecomp.statevector import (MAX_QUBITS, SimulationCapError, StateVector, apply_gate,
                                   apply_ucc_factor_exact, apply_ucc_factor_exact_array, compile_program,
                                   deviation, dump_state, matrix_exponential_oracle, oracle_apply, parse_state,
                                   run_circuit, run_unfused, sector_restrict, sector_restrict_array)
from uccdecomp.synthesis import synth_ucc_factor

from conftest import random_state
from test_circuit import gates
from test_fermion import operators
from test_synthesis import dense_factor


@st.composite
def mixed_circuits(draw, n=6, max_size=40):
    gs = draw(st.lists(gates(n), max_size=max_size))
    if draw(st.booleans()):
        qs = draw(st.permutations(range(n)))
        k = draw(st.integers(1, 3))
        gs.insert(draw(st.integers(0, len(gs))), MCRZ(qs[:k], qs[k], draw(st.floats(-3, 3))))
    return Circuit(n, tuple(gs))


class TestStateVector:
    def test_basis_and_determinant(self):
        s = StateVector.determinant(4, [0, 2])
        assert s.amplitudes[0b0101] == 1 and s.norm() == 1

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector(1, np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            StateVector(2, np.array([1.0, 0.0]))

    def test_cap(self):
        with pytest.raises(SimulationCapError):
            StateVector.basis(MAX_QUBITS + 1, 0)
        assert issubclass(SimulationCapError, DimensionCapError)


class TestApplyGate:
    def test_x(self):
        assert apply_gate(StateVector.basis(1, 0), X(0)).amplitudes[1] == 1

    def test_cnot_control_set(self):
        out = apply_gate(StateVector.determinant(2, [0]), CNOT(0, 1))
        assert out.amplitudes[0b11] == 1

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_gate(StateVector.basis(2, 0), CNOT(0, 2))

    @given(mixed_circuits())
    def test_random_sequence_against_unitary(self, c):
        rng = np.random.default_rng(len(c.gates))
        s = StateVector.random(6, rng)
        expected = unitary(c) @ s.amplitudes
        for g in c.gates:
            s = apply_gate(s, g)
            assert abs(s.norm() - 1) < 1e-12
        np.testing.assert_allclose(s.amplitudes, expected, atol=1e-12)

    @given(mixed_circuits())
    def test_fused_matches_unfused(self, c):
        rng = np.random.default_rng(7)
        batch = random_state(6, rng, batch=3)
        ref = run_unfused(c, batch)
        np.testing.assert_allclose(compile_program(c).run(batch), ref, atol=1e-12)
        np.testing.assert_allclose(compile_program(c, layers=False).run(batch), ref, atol=1e-12)

    def test_fusion_cancels_inverse_pairs(self):
        c = Circuit(2, (H(0), H(0), RX(1, 0.3), RX(1, -0.3), X(0), X(0)))
        assert compile_program(c).passes == 0

    def test_run_circuit(self, rng):
        c = Circuit(3, (H(0), CNOT(0, 1), RZ(1, 0.4), CNOT(1, 2)))
        s = StateVector.random(3, rng)
        np.testing.assert_allclose(run_circuit(c, s).amplitudes, unitary(c) @ s.amplitudes, atol=1e-12)


@pytest.mark.skipif("cython" not in kernels.backends(), reason="compiled kernels not built")
class TestKernelBackends:
    """The compiled kernels agree with the numpy fallback bit-for-bit up to rounding."""

    def pair(self):
        b = kernels.backends()
        return b["cython"], b["python"]

    @pytest.mark.parametrize("q", [0, 3, 6])
    def test_apply_1q(self, q, rng):
        fast, slow = self.pair()
        m = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        a = random_state(7, rng, batch=3)
        b = a.copy()
        fast.apply_1q(a, q, m)
        slow.apply_1q(b, q, m)
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_apply_1q_layer(self, rng):
        fast, slow = self.pair()
        qubits = np.array([5, 0, 2, 6], dtype=np.int64)
        mats = np.ascontiguousarray(np.stack([np.linalg.qr(rng.normal(size=(2, 2)) + 0j)[0] for _ in qubits]))
        a = random_state(7, rng, batch=2)
        b = a.copy()
        fast.apply_1q_layer(a, qubits, mats)
        slow.apply_1q_layer(b, qubits, mats)
        np.testing.assert_allclose(a, b, atol=1e-14)

    @pytest.mark.parametrize("terms", [0, 1, 3, 8, 9, 20])
    def test_phase_terms(self, terms, rng):
        # more than eight terms spans several lookup groups in the compiled kernel
        fast, slow = self.pair()
        masks = rng.integers(1, 2 ** 7, size=terms, dtype=np.uint64)
        p0 = np.exp(1j * rng.uniform(-3, 3, size=terms))
        p1 = np.exp(1j * rng.uniform(-3, 3, size=terms))
        a = random_state(7, rng, batch=2)
        b = a.copy()
        fast.apply_phase_terms(a, masks, p0, p1)
        slow.apply_phase_terms(b, masks, p0, p1)
        np.testing.assert_allclose(a, b, atol=1e-13)

    @pytest.mark.parametrize("n", [1, 5, 7])
    def test_affine_permutation(self, n, rng):
        fast, slow = self.pair()
        while True:
            m = rng.integers(0, 2, size=(n, n))
            if round(abs(np.linalg.det(m))) % 2:  # invertible over GF(2)
                break
        rows = np.array([sum(int(v) << j for j, v in enumerate(r)) for r in m], dtype=np.uint64)
        flips = np.uint64(rng.integers(0, 2 ** n))
        a = random_state(n, rng, batch=2)
        out_a, out_b = np.empty_like(a), np.empty_like(a)
        fast.apply_affine_permutation(a, out_a, rows, flips)
        slow.apply_affine_permutation(a, out_b, rows, flips)
        np.testing.assert_array_equal(out_a, out_b)

def test_pure_python_switch():
    code = "from uccdecomp import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True,
                         env={"UCCDECOMP_PURE_PYTHON": "1", "PATH": ""})
    assert out.stdout.strip() == "python"


class TestExactFactor:
    def test_zero_angle(self, rng):
        s = StateVector.random(5, rng)
        out = apply_ucc_factor_exact(s, ExcitationOperator((0, 1), (3, 4)), 0.0, JwConvention(5))
        np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_quarter_turn(self):
        op, conv = ExcitationOperator((0, 3), (1, 2)), JwConvention(4)
        s = StateVector.determinant(4, [0, 3])
        out = apply_ucc_factor_exact(s, op, math.pi / 2, conv)
        sign, det = apply_excitation(op, 0b1001, conv)
        expected = np.zeros(16)
        expected[det] = sign
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)
        oracle = matrix_exponential_oracle(op, math.pi / 2, conv)[:, 0b1001]
        np.testing.assert_allclose(out.amplitudes, oracle, atol=1e-12)

    @pytest.mark.parametrize("op,m", [
        (ExcitationOperator((0,), (2,)), 4),
        (ExcitationOperator((1, 3), (0, 4)), 6),
        (ExcitationOperator((0, 1, 2), (5, 4, 3)), 7),
        (ExcitationOperator((0, 4, 5), (7, 1, 3)), 8),
    ])
    def test_all_basis_states_against_dense(self, op, m, rng):
        conv = JwConvention(m)
        for theta in rng.uniform(-math.pi, math.pi, 3):
            u = matrix_exponential_oracle(op, theta, conv)
            out = apply_ucc_factor_exact_array(np.eye(2 ** m, dtype=complex), op, theta, conv, m)
            np.testing.assert_allclose(out, u, atol=1e-11)
            np.testing.assert_allclose(u, dense_factor(op, theta, conv), atol=1e-12)

    def test_rank4_twelve_qubits(self, rng):
        op, conv = ExcitationOperator((0, 6, 2, 9), (11, 4, 7, 1)), JwConvention(12)
        psi = random_state(12, rng, batch=2)
        theta = rng.uniform(-math.pi, math.pi)
        np.testing.assert_allclose(apply_ucc_factor_exact_array(psi, op, theta, conv, 12),
                                   oracle_apply(op, theta, conv, psi), atol=1e-11)

    @given(operators(max_rank=3, max_orbitals=7), st.floats(-math.pi, math.pi))
    def test_norm_and_untouched(self, case, theta):
        op, conv = case
        n = conv.total_qubits
        psi = random_state(n, np.random.default_rng(n))
        out = apply_ucc_factor_exact_array(psi, op, theta, conv, n)
        assert abs(np.linalg.norm(out) - 1) < 1e-12
        for det in range(2 ** n):
            if apply_excitation(op, det, conv) is None and apply_excitation(op.adjoint(), det, conv) is None:
                assert out[det] == psi[det]

    def test_invalid_operator(self):
        with pytest.raises(OperatorError):
            apply_ucc_factor_exact(StateVector.basis(3, 0), ExcitationOperator((0,), (5,)), 0.1, JwConvention(3))


class TestOracle:
    def test_identity_and_unitary(self, rng):
        op, conv = ExcitationOperator((0, 2), (1, 4)), JwConvention(5)
        np.testing.assert_allclose(matrix_exponential_oracle(op, 0.0, conv), np.eye(32), atol=1e-15)
        u = matrix_exponential_oracle(op, rng.uniform(-3, 3), conv)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(32), atol=1e-12)

    def test_cap(self):
        with pytest.raises(DimensionCapError):
            matrix_exponential_oracle(ExcitationOperator((0,), (1,)), 0.1, JwConvention(6), cap=5)

    def test_synthesized_factor_via_simulator(self, rng):
        op, conv = ExcitationOperator((0, 1, 5), (2, 7, 3)), JwConvention(8)
        psi = random_state(8, rng, batch=4)
        theta = rng.uniform(-math.pi, math.pi)
        out = compile_program(synth_ucc_factor(op, theta, conv)).run(psi)
        np.testing.assert_allclose(out, apply_ucc_factor_exact_array(psi, op, theta, conv, 8), atol=1e-11)


class TestSectorRestrict:
    def test_no_leak(self, rng):
        s = StateVector(3, np.kron([1, 0], StateVector.random(2, rng).amplitudes))
        rest, leaked = sector_restrict(s, [2])
        assert leaked == 0
        np.testing.assert_allclose(rest.amplitudes, s.amplitudes[:4])

    def test_full_leak(self):
        rest, leaked = sector_restrict(StateVector.determinant(3, [1]), [1])
        assert rest is None and leaked == 1

    def test_compresses_middle_qubit(self):
        amps = np.zeros(8, dtype=complex)
        amps[0b100] = 1.0  # qubit 2 set, ancilla qubit 1 clear
        out, leaked = sector_restrict_array(amps, 3, [1])
        assert leaked == 0 and out[0b10] == 1


class TestDeviation:
    def test_examples(self, rng):
        s = StateVector.random(3, rng)
        assert deviation(s, s) == 0
        assert deviation(StateVector.basis(2, 0), StateVector.basis(2, 3)) == 1

    def test_global_phase_counts(self):
        a = StateVector.basis(1, 0)
        assert deviation(a, StateVector(1, -a.amplitudes)) == 2


class TestDump:
    def test_format(self):
        s = StateVector(3, np.array([0, 0.6, 0, 0, 0, 0, 0, 0.8j]))
        assert dump_state(s) == "100 0.6 0.0\n111 0.0 0.8\n"

    def test_round_trip(self, rng):
        s = StateVector.random(4, rng)
        back = parse_state(dump_state(s))
        np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
