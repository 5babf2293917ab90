"""Model wiring: layered circuits, swap tests, forward passes."""

import math

import numpy as np
import pytest

import qganlab.embedding as emb
import qganlab.models as qm
import qganlab.qcore as qc
from helpers import random_state


class TestBuildQvcLayer:
    def test_parameter_count_chain(self):
        """depth * (n + 2*(n-1)) fresh parameters on a chain."""
        for n in (2, 3, 4, 6):
            for depth in (1, 2, 4):
                circ = qm.build_qvc_layer(n, depth)
                assert circ.n_params == depth * (n + 2 * (n - 1)), (n, depth)

    def test_parameter_count_ring(self):
        circ = qm.build_qvc_layer(4, 3, topology="ring")
        assert circ.n_params == 3 * (4 + 2 * 4)

    def test_layer_gate_sequence(self):
        """Each layer is RYs, then RYY pairs, then decomposed controlled-RYs."""
        circ = qm.build_qvc_layer(3, 1)
        kinds = [g.kind for g in circ.gates]
        assert kinds[:3] == ["RY", "RY", "RY"]
        assert kinds[3:5] == ["RYY", "RYY"]
        # each controlled-RY contributes RY, CNOT, RY, CNOT
        assert kinds[5:] == ["RY", "CNOT", "RY", "CNOT"] * 2
        assert [g.wires for g in circ.gates[3:5]] == [(0, 1), (1, 2)]

    def test_depth_two_runs_layers_in_sequence(self):
        """Running depth 2 equals running the depth-1 layer twice."""
        rng = np.random.default_rng(3)
        one = qm.build_qvc_layer(3, 1)
        two = qm.build_qvc_layer(3, 2)
        p = rng.uniform(-1, 1, two.n_params)
        first = qc.run(one, p[: one.n_params])
        chained = qc.run(one, p[one.n_params :], initial=first)
        np.testing.assert_allclose(
            qc.run(two, p).amplitudes, chained.amplitudes, atol=1e-12,
        )

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError, match="two qubits"):
            qm.build_qvc_layer(1, 1)
        with pytest.raises(ValueError, match="depth"):
            qm.build_qvc_layer(3, 0)
        with pytest.raises(ValueError, match="topology"):
            qm.build_qvc_layer(3, 1, topology="star")


class TestSwapTest:
    def test_identical_pure_states_give_one(self):
        rng = np.random.default_rng(5)
        a = qc.StateVector(2, random_state(4, rng))
        state = qm.compose_registers(a, a)
        assert qm.swap_test(state, (0, 1), (2, 3), 4) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_pure_states_give_half(self):
        a = qc.StateVector.zero(1)
        b = qc.apply_gate(a, qc.Gate("X", (0,)))
        state = qm.compose_registers(a, b)
        assert qm.swap_test(state, (0,), (1,), 2) == pytest.approx(0.5, abs=1e-12)

    def test_random_pure_pairs_match_overlap_formula(self):
        """P(0) = 1/2 + 1/2 |<a|b>|^2 for uncorrelated pure registers."""
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = qc.StateVector(3, random_state(8, rng))
            b = qc.StateVector(3, random_state(8, rng))
            state = qm.compose_registers(a, b)
            got = qm.swap_test(state, (0, 1, 2), (3, 4, 5), 6)
            want = 0.5 + 0.5 * abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_uncorrelated_mixed_registers_give_trace_product(self):
        """P(0) = 1/2 + 1/2 Tr(rho_A rho_B) with purifier qubits outside."""
        rng = np.random.default_rng(9)
        for _ in range(5):
            psi_ac = random_state(4, rng).reshape(2, 2)
            psi_bd = random_state(4, rng).reshape(2, 2)
            anc = np.array([1.0, 0.0], dtype=complex)
            # qubits: 0 = A, 1 = B, 2 = C (purifies A), 3 = D (purifies B), 4 = ancilla
            amps = np.einsum("ac,bd,e->abcde", psi_ac, psi_bd, anc).reshape(-1)
            state = qc.StateVector(5, amps)
            rho_a = psi_ac @ psi_ac.conj().T
            rho_b = psi_bd @ psi_bd.conj().T
            got = qm.swap_test(state, (0,), (1,), 4)
            want = 0.5 + 0.5 * np.trace(rho_a @ rho_b).real
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_overlapping_registers_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            qm.swap_test(qc.StateVector.zero(3), (0,), (0,), 2)

    def test_unequal_registers_rejected(self):
        with pytest.raises(ValueError, match="equal register sizes"):
            qm.swap_test(qc.StateVector.zero(4), (0, 1), (2,), 3)


class TestIqgan:
    def test_forward_matches_overlap_oracle(self):
        """Full-circuit P(0) equals 1/2 + 1/2 |<x|gamma>|^2 by direct inner product."""
        rng = np.random.default_rng(11)
        model = qm.IqganModel(n_qubits=3, depth=2)
        for _ in range(6):
            params = rng.uniform(-1, 1, model.n_params)
            f = rng.uniform(0, 1, 3)
            got = qm.iqgan_forward(model, params, f)
            x = emb.angle_embed(f, model.embedding)
            gamma = qm.generator_state(model, params)
            want = 0.5 + 0.5 * abs(qc.inner(x, gamma)) ** 2
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_full_circuit_prob_agrees_with_forward(self):
        rng = np.random.default_rng(13)
        model = qm.IqganModel(n_qubits=2, depth=1)
        params = rng.uniform(-1, 1, model.n_params)
        f = rng.uniform(0, 1, 2)
        circ = model.full_circuit(f)
        state = qc.run(circ, params)
        p0 = 1.0 - qc.prob_one(state, model.ancilla)
        np.testing.assert_allclose(p0, qm.iqgan_forward(model, params, f), atol=1e-12)

    def test_trainable_encoder_offsets_shift_data_angles(self):
        """Offset delta on qubit q acts exactly like feature f + delta/pi."""
        rng = np.random.default_rng(17)
        model = qm.IqganModel(n_qubits=2, depth=1, trainable_encoder=True)
        base = qm.IqganModel(n_qubits=2, depth=1)
        gen = rng.uniform(-1, 1, base.n_params)
        offsets = np.array([0.3, -0.2])
        f = np.array([0.4, 0.6])
        got = qm.iqgan_forward(model, np.concatenate([gen, offsets]), f)
        want = qm.iqgan_forward(base, gen, f + offsets / math.pi)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_parameter_layout(self):
        model = qm.IqganModel(n_qubits=4, depth=2, trainable_encoder=True)
        assert model.n_gen_params == 2 * (4 + 2 * 3)
        assert model.n_params == model.n_gen_params + 4

    def test_generator_state_with_noise_seeds_register(self):
        """Noise is angle-embedded as the generator's initial state."""
        model = qm.IqganModel(n_qubits=2, depth=1)
        z = np.array([0.25, 0.75])
        zero_params = np.zeros(model.n_gen_params)
        got = qm.generator_state(model, zero_params, noise=z)
        want = emb.angle_embed(z, model.embedding)
        np.testing.assert_allclose(got.amplitudes, want.amplitudes, atol=1e-12)


class TestQugan:
    def test_disc_out_matches_overlap_oracle(self):
        rng = np.random.default_rng(19)
        model = qm.QuganModel(n_qubits=3, depth=2)
        for _ in range(5):
            disc = rng.uniform(-1, 1, model.discriminator.n_params)
            inp = qc.StateVector(3, random_state(8, rng))
            got = qm.qugan_disc_out(model, disc, inp)
            delta = qc.run(model.discriminator, disc)
            want = 0.5 + 0.5 * abs(qc.inner(delta, inp)) ** 2
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_custom_single_qubit_circuits_accepted(self):
        ry = qc.Circuit(1, (qc.Gate("RY", (0,), qc.ParamRef(0)),), 1)
        model = qm.QuganModel(n_qubits=1, discriminator=ry, generator=ry)
        out = qm.qugan_disc_out(model, [math.pi / 2], qc.StateVector.zero(1))
        # overlap of RY(pi/2)|0> with |0> is cos^2(pi/4) = 1/2
        np.testing.assert_allclose(out, 0.5 + 0.25, atol=1e-12)

    def test_register_size_mismatch_rejected(self):
        model = qm.QuganModel(n_qubits=2, depth=1)
        with pytest.raises(ValueError, match="register"):
            qm.qugan_disc_out(model, np.zeros(model.discriminator.n_params),
                              qc.StateVector.zero(3))


class TestProductIqgan:
    def test_angle_endpoints_and_midpoint(self):
        """theta = 0, pi/2, pi decode to pixels 0, 1/2, 1."""
        model = qm.ProductIqgan(3)
        img = qm.product_iqgan_image(model, [0.0, math.pi / 2, math.pi])
        np.testing.assert_allclose(img, [0.0, 0.5, 1.0], atol=1e-12)

    def test_matches_explicit_ry_construction(self):
        rng = np.random.default_rng(23)
        model = qm.ProductIqgan(4)
        theta = rng.uniform(0, math.pi, 4)
        state = qc.StateVector.zero(4)
        for q in range(4):
            state = qc.apply_gate(state, qc.Gate("RY", (q,)), theta[q])
        want = emb.angle_decode(state)
        np.testing.assert_allclose(
            qm.product_iqgan_image(model, theta), want, atol=1e-12,
        )

    def test_noise_adds_before_trainable_angles(self):
        model = qm.ProductIqgan(2)
        theta = np.array([0.3, 0.9])
        z = np.array([0.1, 0.2])
        got = qm.product_iqgan_image(model, theta, noise=z)
        want = qm.product_iqgan_image(model, theta + math.pi * z)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_wrong_lengths_rejected(self):
        model = qm.ProductIqgan(3)
        with pytest.raises(ValueError, match="angles"):
            qm.product_iqgan_image(model, [0.1, 0.2])
        with pytest.raises(ValueError, match="noise"):
            qm.product_iqgan_image(model, [0.1, 0.2, 0.3], noise=[0.1])


class TestModelJson:
    def test_round_trips(self):
        models = [
            qm.IqganModel(n_qubits=3, depth=2, trainable_encoder=True),
            qm.QuganModel(n_qubits=4, depth=1, topology="ring"),
            qm.ProductIqgan(64),
        ]
        for m in models:
            doc = qm.model_to_json(m)
            back = qm.model_from_json(doc)
            assert qm.model_to_json(back) == doc

    def test_unknown_arch_rejected(self):
        with pytest.raises(ValueError, match="unknown architecture"):
            qm.model_from_json({"arch": "wgan"})
