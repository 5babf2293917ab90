"""Swap-test adversaries: layered variational circuits and model wiring.

Two-register models place register A on qubits [0, m), register B on
qubits [m, 2m) and the swap-test ancilla last on qubit 2m.  The swap test
(H on the ancilla, controlled swaps of paired register qubits, H again)
reads out P(ancilla = 0) = 1/2 + 1/2 |<a|b>|^2 for pure uncorrelated
registers, which is the only measurement any model here uses:

* IQGAN: register A carries an angle-embedded data sample, register B the
  generator circuit's output; the swap-test probability is the training
  signal directly (no separate discriminator network).
* QuGAN: register A carries a variational discriminator state, register B
  either an encoded real sample or the generator's output.
* Product model: one qubit per pixel with a single trainable RY angle,
  no entanglement, usable at hundreds of qubits.

The variational layer unit is n RY rotations, nearest-neighbour RYY
couplings, then nearest-neighbour controlled-RY (stored in its two-RY +
two-CNOT decomposition), giving n + 2(n-1) fresh parameters per layer on
the default chain topology.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .embedding import EmbeddingSpec, angle_embed, qubit_marginal_features
from .qcore import (
    Circuit,
    Gate,
    ParamRef,
    ProductState,
    StateVector,
    apply_gate,
    cry_gates,
    prob_one,
    run,
)


def build_qvc_layer(n_qubits: int, depth: int, topology: str = "chain") -> Circuit:
    """Layered variational circuit; ``depth`` repetitions of the layer unit.

    Chain topology couples (i, i+1) for i < n-1; ring adds the closing
    (n-1, 0) pair. Parameter count: depth * (n + 2*(n-1)) on a chain,
    depth * 3n on a ring.
    """
    if n_qubits < 2:
        raise ValueError("layered circuit needs at least two qubits")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if topology not in ("chain", "ring"):
        raise ValueError(f"unknown topology {topology!r}")
    pairs = [(i, i + 1) for i in range(n_qubits - 1)]
    if topology == "ring":
        pairs.append((n_qubits - 1, 0))
    gates: list[Gate] = []
    p = 0
    for _ in range(depth):
        for q in range(n_qubits):
            gates.append(Gate("RY", (q,), ParamRef(p)))
            p += 1
        for a, b in pairs:
            gates.append(Gate("RYY", (a, b), ParamRef(p)))
            p += 1
        for a, b in pairs:
            gates.extend(cry_gates(a, b, param=p))
            p += 1
    return Circuit(n_qubits, tuple(gates), p)


def shift_circuit(circuit: Circuit, offset: int, n_total: int) -> Circuit:
    """Same gates moved up by ``offset`` wires inside a wider register."""
    gates = tuple(
        Gate(g.kind, tuple(w + offset for w in g.wires), g.param, g.angle)
        for g in circuit.gates
    )
    return Circuit(n_total, gates, circuit.n_params)


def swap_test_gates(
    reg_a: Sequence[int], reg_b: Sequence[int], ancilla: int
) -> tuple[Gate, ...]:
    """H - controlled-swaps - H over two equal registers and an ancilla."""
    reg_a, reg_b = tuple(reg_a), tuple(reg_b)
    if len(reg_a) != len(reg_b):
        raise ValueError("swap test needs equal register sizes")
    touched = set(reg_a) | set(reg_b) | {ancilla}
    if len(touched) != 2 * len(reg_a) + 1:
        raise ValueError("swap-test registers and ancilla must not overlap")
    gates = [Gate("H", (ancilla,))]
    for a, b in zip(reg_a, reg_b):
        gates.append(Gate("CSWAP", (ancilla, a, b)))
    gates.append(Gate("H", (ancilla,)))
    return tuple(gates)


def swap_test(
    state: StateVector, reg_a: Sequence[int], reg_b: Sequence[int], ancilla: int
) -> float:
    """P(ancilla = 0) after the swap-test circuit on a prepared state.

    Equals 1/2 + 1/2 |<a|b>|^2 when the registers hold uncorrelated pure
    states, and 1/2 + 1/2 Tr(rho_a rho_b) for uncorrelated mixed ones.
    """
    amps = state
    for g in swap_test_gates(reg_a, reg_b, ancilla):
        amps = apply_gate(amps, g)
    return 1.0 - prob_one(amps, ancilla)


def compose_registers(state_a: StateVector, state_b: StateVector) -> StateVector:
    """|a> on register A, |b> on register B, ancilla |0> appended last."""
    if state_a.n_qubits != state_b.n_qubits:
        raise ValueError("registers must have equal sizes")
    amps = np.kron(
        np.kron(state_a.amplitudes, state_b.amplitudes),
        np.array([1.0, 0.0], dtype=complex),
    )
    return StateVector(2 * state_a.n_qubits + 1, amps)


class IqganModel:
    """Two-register swap-test generator model.

    The data sample is angle-embedded on register A; a layered variational
    circuit prepares register B from |0...0>; the swap-test probability is
    both the output and the training signal. With ``trainable_encoder`` one
    RY offset per data qubit is appended to the parameter vector and added
    on top of each data angle.
    """

    arch = "iqgan"

    def __init__(
        self,
        n_qubits: int = 4,
        depth: int = 2,
        angle_scale: float = math.pi,
        trainable_encoder: bool = False,
        topology: str = "chain",
    ):
        self.n_qubits = int(n_qubits)
        self.depth = int(depth)
        self.topology = topology
        self.trainable_encoder = bool(trainable_encoder)
        self.embedding = EmbeddingSpec("angle", self.n_qubits, angle_scale)
        self.generator = build_qvc_layer(self.n_qubits, self.depth, topology)
        self.n_gen_params = self.generator.n_params
        self.n_params = self.n_gen_params + (
            self.n_qubits if self.trainable_encoder else 0
        )
        self.reg_a = tuple(range(self.n_qubits))
        self.reg_b = tuple(range(self.n_qubits, 2 * self.n_qubits))
        self.ancilla = 2 * self.n_qubits

    def encoder_gates(self, features: np.ndarray) -> tuple[Gate, ...]:
        """RY(scale * f_q [+ offset_q]) on each register-A qubit."""
        f = np.asarray(features, dtype=float)
        if f.shape != (self.n_qubits,):
            raise ValueError(
                f"expected {self.n_qubits} features, got shape {f.shape}"
            )
        gates = []
        for q in range(self.n_qubits):
            angle = self.embedding.angle_scale * float(f[q])
            if self.trainable_encoder:
                gates.append(
                    Gate("RY", (q,), ParamRef(self.n_gen_params + q), angle)
                )
            else:
                gates.append(Gate("RY", (q,), angle=angle))
        return tuple(gates)

    def full_circuit(self, features: np.ndarray) -> Circuit:
        """Encoder + generator + swap test on 2m+1 qubits, one parameter set."""
        n_total = 2 * self.n_qubits + 1
        gen = shift_circuit(self.generator, self.n_qubits, n_total)
        gates = (
            self.encoder_gates(features)
            + gen.gates
            + swap_test_gates(self.reg_a, self.reg_b, self.ancilla)
        )
        return Circuit(n_total, gates, self.n_params)

    def to_json(self) -> dict:
        return {
            "arch": self.arch,
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "topology": self.topology,
            "angle_scale": self.embedding.angle_scale,
            "trainable_encoder": self.trainable_encoder,
        }


def iqgan_forward(model: IqganModel, params, features) -> float:
    """Swap-test P(0) for one sample: the full-circuit (honest) route."""
    params = np.asarray(params, dtype=float)
    n_total = 2 * model.n_qubits + 1
    gen = shift_circuit(model.generator, model.n_qubits, n_total)
    prep = Circuit(
        n_total, model.encoder_gates(features) + gen.gates, model.n_params
    )
    state = run(prep, params)
    return swap_test(state, model.reg_a, model.reg_b, model.ancilla)


def generator_state(model, gen_params, noise=None) -> StateVector:
    """Generator register output, optionally seeded with angle-embedded noise."""
    gen_params = np.asarray(gen_params, dtype=float)
    if gen_params.shape != (model.generator.n_params,):
        raise ValueError(
            f"generator takes {model.generator.n_params} parameters, "
            f"got shape {gen_params.shape}"
        )
    initial = None
    if noise is not None:
        initial = angle_embed(noise, model.embedding)
    return run(model.generator, gen_params, initial=initial)


class QuganModel:
    """Two-register adversary with variational circuits on both sides.

    The discriminator prepares a reference state on register A; register B
    receives either an encoded data sample or the generator's output, and
    the swap test compares them. Both circuits default to the same layered
    structure; custom circuits may be injected for small studies.
    """

    arch = "qugan"

    def __init__(
        self,
        n_qubits: int = 4,
        depth: int = 2,
        angle_scale: float = math.pi,
        topology: str = "chain",
        discriminator: Circuit | None = None,
        generator: Circuit | None = None,
    ):
        self.n_qubits = int(n_qubits)
        self.depth = int(depth)
        self.topology = topology
        self.embedding = EmbeddingSpec("angle", self.n_qubits, angle_scale)
        self.discriminator = discriminator or build_qvc_layer(
            self.n_qubits, self.depth, topology
        )
        self.generator = generator or build_qvc_layer(
            self.n_qubits, self.depth, topology
        )
        if (
            self.discriminator.n_qubits != self.n_qubits
            or self.generator.n_qubits != self.n_qubits
        ):
            raise ValueError("custom circuits must match the register size")
        self.reg_a = tuple(range(self.n_qubits))
        self.reg_b = tuple(range(self.n_qubits, 2 * self.n_qubits))
        self.ancilla = 2 * self.n_qubits

    def to_json(self) -> dict:
        return {
            "arch": self.arch,
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "topology": self.topology,
            "angle_scale": self.embedding.angle_scale,
        }


def qugan_disc_out(model: QuganModel, disc_params, input_state: StateVector) -> float:
    """Swap-test P(0) between the discriminator state and an input state.

    Honest route: the input occupies register B of the composed system, the
    discriminator circuit runs on register A, then the swap test measures.
    """
    disc_params = np.asarray(disc_params, dtype=float)
    if input_state.n_qubits != model.n_qubits:
        raise ValueError(
            f"input has {input_state.n_qubits} qubits, register holds {model.n_qubits}"
        )
    composed = compose_registers(StateVector.zero(model.n_qubits), input_state)
    n_total = 2 * model.n_qubits + 1
    disc = shift_circuit(model.discriminator, 0, n_total)
    state = run(disc, disc_params, initial=composed)
    return swap_test(state, model.reg_a, model.reg_b, model.ancilla)


class ProductIqgan:
    """One qubit per pixel, one trainable RY angle per qubit, no entanglement.

    Scales to full image resolutions (e.g. 784 qubits) because the state
    stays in product form; each pixel is read out independently from its
    qubit's |1> probability through the angle-decode convention.
    """

    arch = "product"

    def __init__(self, n_pixels: int, angle_scale: float = math.pi):
        if n_pixels < 1:
            raise ValueError("need at least one pixel")
        self.n_pixels = int(n_pixels)
        self.angle_scale = float(angle_scale)
        self.n_params = self.n_pixels

    def to_json(self) -> dict:
        return {
            "arch": self.arch,
            "n_pixels": self.n_pixels,
            "angle_scale": self.angle_scale,
        }


def product_iqgan_image(model: ProductIqgan, params, noise=None) -> np.ndarray:
    """Decoded pixel vector of the product model at the given angles.

    ``noise`` (same length as the pixel grid) is angle-embedded first and
    the trainable rotations act on top, i.e. the qubit angle is
    scale * z_p + theta_p.
    """
    theta = np.asarray(params, dtype=float)
    if theta.shape != (model.n_pixels,):
        raise ValueError(
            f"expected {model.n_pixels} angles, got shape {theta.shape}"
        )
    total = theta.copy()
    if noise is not None:
        z = np.asarray(noise, dtype=float)
        if z.shape != theta.shape:
            raise ValueError("noise must have one entry per pixel")
        total = total + model.angle_scale * z
    half = 0.5 * total
    factors = np.stack([np.cos(half), np.sin(half)], axis=1).astype(complex)
    state = ProductState(model.n_pixels, factors)
    return qubit_marginal_features(state, model.angle_scale)


def model_to_json(model) -> dict:
    """Architecture document for any of the three model kinds."""
    return model.to_json()


def model_from_json(doc: dict):
    """Rebuild a model from :func:`model_to_json` output."""
    arch = doc.get("arch")
    if arch == "iqgan":
        return IqganModel(
            n_qubits=doc["n_qubits"],
            depth=doc["depth"],
            angle_scale=doc.get("angle_scale", math.pi),
            trainable_encoder=doc.get("trainable_encoder", False),
            topology=doc.get("topology", "chain"),
        )
    if arch == "qugan":
        return QuganModel(
            n_qubits=doc["n_qubits"],
            depth=doc["depth"],
            angle_scale=doc.get("angle_scale", math.pi),
            topology=doc.get("topology", "chain"),
        )
    if arch == "product":
        return ProductIqgan(
            n_pixels=doc["n_pixels"], angle_scale=doc.get("angle_scale", math.pi)
        )
    raise ValueError(f"unknown architecture {arch!r}")
