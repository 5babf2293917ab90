"""Simulator core: gate conventions, circuit execution, density operations.

Every derived expectation is checked against an independent brute-force
oracle from helpers.py (bit-twiddled unitary embedding, power-series
exponentials, triple-loop partial traces).
"""

import math

import numpy as np
import pytest

import qganlab.qcore as qc
from helpers import (
    circuit_unitary,
    embed_unitary,
    expm_series,
    partial_trace_oracle,
    random_circuit,
    random_state,
)

RT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# gate matrices
# ---------------------------------------------------------------------------


class TestGateMatrices:
    def test_ry_rotates_zero_to_equal_superposition(self):
        """RY(pi/2)|0> = (|0> + |1>)/sqrt(2) under the half-angle convention."""
        state = qc.apply_gate(qc.StateVector.zero(1), qc.Gate("RY", (0,)), math.pi / 2)
        np.testing.assert_allclose(
            state.amplitudes, [1 / RT2, 1 / RT2], atol=1e-12,
            err_msg="RY(pi/2)|0> should be the equal superposition",
        )

    def test_ry_matches_series_exponential(self):
        """RY(t) = exp(-i t Y / 2) for a sweep of angles."""
        y = np.array([[0, -1j], [1j, 0]])
        for theta in np.linspace(-2 * math.pi, 2 * math.pi, 17):
            np.testing.assert_allclose(
                qc.ry_matrix(theta), expm_series(-0.5j * theta * y), atol=1e-12,
            )

    def test_ryy_matches_series_exponential(self):
        """RYY(t) = exp(-i t (YxY) / 2) for a sweep of angles."""
        y = np.array([[0, -1j], [1j, 0]])
        yy = np.kron(y, y)
        for theta in np.linspace(-2 * math.pi, 2 * math.pi, 17):
            np.testing.assert_allclose(
                qc.ryy_matrix(theta), expm_series(-0.5j * theta * yy), atol=1e-12,
            )

    def test_gate_matrices_are_unitary(self):
        rng = np.random.default_rng(7)
        for kind in qc.GATE_ARITY:
            theta = float(rng.uniform(-math.pi, math.pi))
            u = qc.gate_unitary(kind, theta)
            np.testing.assert_allclose(
                u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12,
                err_msg=f"{kind} is not unitary",
            )

    def test_cnot_and_cswap_permutation_tables(self):
        """Control is the first wire: |10> -> |11>, |101> -> |110>."""
        cnot = qc.gate_unitary("CNOT")
        assert cnot[3, 2] == 1.0 and cnot[2, 3] == 1.0
        cswap = qc.gate_unitary("CSWAP")
        assert cswap[6, 5] == 1.0 and cswap[5, 6] == 1.0
        assert cswap[0, 0] == 1.0 and cswap[4, 4] == 1.0

    def test_unknown_gate_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown gate kind"):
            qc.gate_unitary("RZ")


class TestCryDecomposition:
    def test_decomposition_matches_direct_controlled_ry(self):
        """[RY(t/2), CNOT, RY(-t/2), CNOT] composes to the 4x4 controlled-RY."""
        rng = np.random.default_rng(11)
        for _ in range(20):
            theta = float(rng.uniform(-2 * math.pi, 2 * math.pi))
            gates = qc.cry_gates(0, 1, param=0)
            u = np.eye(4, dtype=complex)
            for g in gates:
                angle = qc.resolve_angle(g, np.array([theta]))
                u = embed_unitary(qc.gate_unitary(g.kind, angle), g.wires, 2) @ u
            np.testing.assert_allclose(
                u, qc.cry_matrix(theta), atol=1e-12,
                err_msg="CRY decomposition must equal the direct unitary",
            )

    def test_shared_parameter_scales(self):
        gates = qc.cry_gates(2, 0, param=5)
        refs = [g.param for g in gates if g.param is not None]
        assert [r.index for r in refs] == [5, 5]
        assert [r.scale for r in refs] == [0.5, -0.5]

    def test_fixed_angle_variant(self):
        gates = qc.cry_gates(0, 1, angle=1.2)
        assert gates[0].angle == 0.6 and gates[2].angle == -0.6
        assert all(g.param is None for g in gates)


# ---------------------------------------------------------------------------
# states and validation
# ---------------------------------------------------------------------------


class TestStateVector:
    def test_zero_state(self):
        s = qc.StateVector.zero(3)
        assert s.amplitudes[0] == 1.0 and np.sum(np.abs(s.amplitudes)) == 1.0

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="not normalized"):
            qc.StateVector(1, np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="amplitudes"):
            qc.StateVector(2, np.array([1.0, 0.0]))

    def test_from_amplitudes_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            qc.StateVector.from_amplitudes(np.ones(3) / math.sqrt(3))

    def test_qubit_zero_is_most_significant_bit(self):
        """X on qubit 0 of |00> lands on basis index 2 (= |10>)."""
        s = qc.apply_gate(qc.StateVector.zero(2), qc.Gate("X", (0,)))
        np.testing.assert_allclose(s.amplitudes, [0, 0, 1, 0], atol=1e-15)
        s = qc.apply_gate(qc.StateVector.zero(2), qc.Gate("X", (1,)))
        np.testing.assert_allclose(s.amplitudes, [0, 1, 0, 0], atol=1e-15)

    def test_norm_preserved_by_random_circuits(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            circ = random_circuit(3, rng, n_gates=15)
            params = rng.uniform(-math.pi, math.pi, circ.n_params)
            out = qc.run(circ, params)
            np.testing.assert_allclose(
                np.sum(np.abs(out.amplitudes) ** 2), 1.0, atol=1e-12,
            )


class TestCircuitValidation:
    def test_wire_out_of_range(self):
        with pytest.raises(ValueError, match="exceeds"):
            qc.Circuit(2, (qc.Gate("RY", (2,), qc.ParamRef(0)),), 1)

    def test_param_out_of_range(self):
        with pytest.raises(ValueError, match="declares only"):
            qc.Circuit(2, (qc.Gate("RY", (0,), qc.ParamRef(1)),), 1)

    def test_duplicate_wires_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            qc.Gate("CNOT", (1, 1))

    def test_nonparametric_gate_rejects_param(self):
        with pytest.raises(ValueError, match="no parameter"):
            qc.Gate("H", (0,), qc.ParamRef(0))

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError, match="wires"):
            qc.Gate("CNOT", (0,))


# ---------------------------------------------------------------------------
# circuit execution against the dense-unitary oracle
# ---------------------------------------------------------------------------


class TestRun:
    def test_run_matches_unitary_product_oracle(self):
        """Running a random 3-qubit circuit equals multiplying embedded gates."""
        rng = np.random.default_rng(19)
        for _ in range(8):
            circ = random_circuit(3, rng, n_gates=12)
            params = rng.uniform(-math.pi, math.pi, circ.n_params)
            init = qc.StateVector(3, random_state(8, rng))
            got = qc.run(circ, params, initial=init)
            want = circuit_unitary(circ, params) @ init.amplitudes
            np.testing.assert_allclose(got.amplitudes, want, atol=1e-10)

    def test_gate_shifts_offset_single_gates(self):
        """A per-gate shift changes that gate's angle only."""
        rng = np.random.default_rng(23)
        circ = random_circuit(2, rng, n_gates=8)
        params = rng.uniform(-1, 1, circ.n_params)
        shifts = np.zeros(len(circ.gates))
        pos = circ.parametric_positions()[0]
        shifts[pos] = 0.37
        got = qc.run(circ, params, gate_shifts=shifts)
        want = circuit_unitary(circ, params, gate_shifts=shifts) @ qc.StateVector.zero(2).amplitudes
        np.testing.assert_allclose(got.amplitudes, want, atol=1e-10)

    def test_param_count_mismatch(self):
        circ = qc.Circuit(1, (qc.Gate("RY", (0,), qc.ParamRef(0)),), 1)
        with pytest.raises(ValueError, match="parameters"):
            qc.run(circ, np.zeros(2))

    def test_initial_qubit_mismatch(self):
        circ = qc.Circuit(2, (qc.Gate("H", (0,)),), 0)
        with pytest.raises(ValueError, match="initial state"):
            qc.run(circ, [], initial=qc.StateVector.zero(1))


class TestProbOne:
    def test_matches_direct_summation(self):
        """prob_one sums |amp|^2 over indices whose qubit bit is 1."""
        rng = np.random.default_rng(29)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            s = qc.StateVector(n, random_state(2**n, rng))
            for q in range(n):
                want = sum(
                    abs(s.amplitudes[i]) ** 2
                    for i in range(2**n)
                    if (i >> (n - 1 - q)) & 1
                )
                np.testing.assert_allclose(qc.prob_one(s, q), want, atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            qc.prob_one(qc.StateVector.zero(2), 2)


class TestInner:
    def test_conjugate_linear_in_first_argument(self):
        rng = np.random.default_rng(31)
        a = qc.StateVector(2, random_state(4, rng))
        b = qc.StateVector(2, random_state(4, rng))
        want = np.sum(a.amplitudes.conj() * b.amplitudes)
        np.testing.assert_allclose(qc.inner(a, b), want, atol=1e-12)
        np.testing.assert_allclose(qc.inner(a, b), np.conj(qc.inner(b, a)), atol=1e-12)

    def test_qubit_count_mismatch(self):
        with pytest.raises(ValueError, match="equal qubit counts"):
            qc.inner(qc.StateVector.zero(1), qc.StateVector.zero(2))


# ---------------------------------------------------------------------------
# density matrices
# ---------------------------------------------------------------------------


class TestDensityMatrix:
    def test_from_state_is_projector(self):
        rng = np.random.default_rng(37)
        s = qc.StateVector(2, random_state(4, rng))
        rho = qc.DensityMatrix.from_state(s)
        np.testing.assert_allclose(rho.matrix @ rho.matrix, rho.matrix, atol=1e-12)

    def test_rejects_non_hermitian(self):
        m = np.eye(2, dtype=complex)
        m[0, 1] = 0.5
        with pytest.raises(ValueError, match="Hermitian"):
            qc.DensityMatrix(1, m)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            qc.DensityMatrix(1, np.eye(2, dtype=complex))

    def test_rejects_negative_eigenvalue(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="negative eigenvalue"):
            qc.DensityMatrix(1, m)


class TestPartialTrace:
    def test_pure_state_matches_loop_oracle(self):
        """Reduced matrices agree with the explicit triple-loop oracle."""
        rng = np.random.default_rng(41)
        for _ in range(10):
            n = int(rng.integers(2, 5))
            s = qc.StateVector(n, random_state(2**n, rng))
            size = int(rng.integers(1, n))
            keep = sorted(rng.choice(n, size=size, replace=False).tolist())
            got = qc.partial_trace(s, keep)
            want = partial_trace_oracle(s.amplitudes, n, keep)
            np.testing.assert_allclose(got.matrix, want, atol=1e-12)

    def test_density_input_matches_pure_route(self):
        rng = np.random.default_rng(43)
        for _ in range(6):
            n = 4
            s = qc.StateVector(n, random_state(2**n, rng))
            rho = qc.DensityMatrix.from_state(s)
            keep = [0, 2]
            np.testing.assert_allclose(
                qc.partial_trace(rho, keep).matrix,
                qc.partial_trace(s, keep).matrix,
                atol=1e-12,
            )

    def test_keep_everything_returns_outer_product(self):
        rng = np.random.default_rng(47)
        s = qc.StateVector(3, random_state(8, rng))
        got = qc.partial_trace(s, range(3))
        np.testing.assert_allclose(
            got.matrix, np.outer(s.amplitudes, s.amplitudes.conj()), atol=1e-12,
        )

    def test_product_state_reduction_is_pure(self):
        """Tracing half of a product state leaves a rank-1 reduced matrix."""
        a = qc.apply_gate(qc.StateVector.zero(1), qc.Gate("RY", (0,)), 0.7)
        b = qc.apply_gate(qc.StateVector.zero(1), qc.Gate("RY", (0,)), -1.1)
        joint = qc.StateVector(2, np.kron(a.amplitudes, b.amplitudes))
        red = qc.partial_trace(joint, [0])
        np.testing.assert_allclose(
            red.matrix, np.outer(a.amplitudes, a.amplitudes.conj()), atol=1e-12,
        )

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            qc.partial_trace(qc.StateVector.zero(2), [])

    def test_out_of_range_keep_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            qc.partial_trace(qc.StateVector.zero(2), [2])


class TestEnsembles:
    def test_mixture_matrix(self):
        """sum p_i |x_i><x_i| assembled entry by entry."""
        rng = np.random.default_rng(53)
        states = [qc.StateVector(2, random_state(4, rng)) for _ in range(3)]
        probs = np.array([0.5, 0.3, 0.2])
        rho = qc.density_from_ensemble(states, probs)
        want = sum(
            p * np.outer(s.amplitudes, s.amplitudes.conj())
            for p, s in zip(probs, states)
        )
        np.testing.assert_allclose(rho.matrix, want, atol=1e-12)

    def test_rejects_bad_probabilities(self):
        states = [qc.StateVector.zero(1), qc.StateVector.zero(1)]
        with pytest.raises(ValueError, match="sum"):
            qc.density_from_ensemble(states, [0.5, 0.6])
        with pytest.raises(ValueError, match="nonnegative"):
            qc.density_from_ensemble(states, [1.5, -0.5])

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(ValueError, match="share one qubit count"):
            qc.density_from_ensemble(
                [qc.StateVector.zero(1), qc.StateVector.zero(2)], [0.5, 0.5]
            )


class TestEigh:
    def test_reconstruction_residual(self):
        """rho = sum_k lambda_k |v_k><v_k| with descending eigenvalues."""
        rng = np.random.default_rng(59)
        for _ in range(6):
            states = [qc.StateVector(2, random_state(4, rng)) for _ in range(4)]
            p = rng.uniform(0.1, 1.0, 4)
            p /= p.sum()
            rho = qc.density_from_ensemble(states, p)
            vals, vecs = qc.eigh(rho)
            assert np.all(np.diff(vals) <= 1e-12), "eigenvalues must descend"
            recon = sum(
                v * np.outer(s.amplitudes, s.amplitudes.conj())
                for v, s in zip(vals, vecs)
            )
            np.testing.assert_allclose(recon, rho.matrix, atol=1e-10)


# ---------------------------------------------------------------------------
# product states
# ---------------------------------------------------------------------------


class TestProductState:
    def test_to_statevector_is_kron_chain(self):
        rng = np.random.default_rng(61)
        factors = np.stack([random_state(2, rng) for _ in range(4)])
        p = qc.ProductState(4, factors)
        want = np.array([1.0], dtype=complex)
        for q in range(4):
            want = np.kron(want, factors[q])
        np.testing.assert_allclose(p.to_statevector().amplitudes, want, atol=1e-12)

    def test_product_apply_matches_dense(self):
        rng = np.random.default_rng(67)
        factors = np.stack([random_state(2, rng) for _ in range(3)])
        p = qc.ProductState(3, factors)
        gate = qc.Gate("RY", (1,))
        dense = qc.apply_gate(p.to_statevector(), gate, 0.9)
        np.testing.assert_allclose(
            qc.product_apply(p, gate, 0.9).to_statevector().amplitudes,
            dense.amplitudes,
            atol=1e-12,
        )

    def test_prob_one_consistent_with_dense(self):
        rng = np.random.default_rng(71)
        factors = np.stack([random_state(2, rng) for _ in range(3)])
        p = qc.ProductState(3, factors)
        dense = p.to_statevector()
        for q in range(3):
            np.testing.assert_allclose(p.prob_one(q), qc.prob_one(dense, q), atol=1e-12)

    def test_entangling_gate_rejected(self):
        with pytest.raises(ValueError, match="entangling"):
            qc.product_apply(qc.ProductState.zero(2), qc.Gate("CNOT", (0, 1)))

    def test_unnormalized_factor_rejected(self):
        f = np.zeros((2, 2), dtype=complex)
        f[:, 0] = 2.0
        with pytest.raises(ValueError, match="normalized"):
            qc.ProductState(2, f)
