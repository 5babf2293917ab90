"""Constrained classical net versus small quantum generators on one image.

The comparison trains three models with roughly matched parameter budgets
to reproduce a seeded random 8x8 image from fresh uniform noise:

* a bias-only classical net (diagonal connectivity, weights fixed at 1),
* a pure 6-qubit QVC whose 64 basis-outcome probabilities are the pixels,
* a 12-qubit QVC whose 6 ancillas are traced out before pixel readout.

``depth`` for the classical net counts trainable bias layers including the
affine output layer, so depth 2 means one activated hidden layer plus the
output biases: 2 x 64 = 128 parameters next to 64 (pure) and 136 (ancilla)
rotation angles.  Each model trains on its native scale of the same image:
the classical net on the raw [0, 1] pixels, the quantum models on the
unit-sum normalized copy (probabilities cannot sum to anything else).
Reported MSEs convert through the image's pixel sum so both scales are
comparable across all three models.
"""

from __future__ import annotations

import json
import os
from dataclasses import replace

import numpy as np

from .datapipe import write_pgm
from .embedding import EmbeddingSpec, angle_embed
from .models import build_qvc_layer
from .qcore import run
from .training import LossTrace, TrainConfig, _Cadence, adjoint_grad, make_optimizer

ACTIVATIONS = ("sigmoid", "tanh")


def toy_target(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded 64-pixel uniform image and its unit-sum normalized copy."""
    raw = np.random.default_rng(seed).random(64)
    return raw, raw / raw.sum()


# ---------------------------------------------------------------------------
# bias-only classical net
# ---------------------------------------------------------------------------


class ConstrainedNet:
    """Per-channel bias chain: no cross-channel mixing, no trainable weights.

    Channel i sees only channel i of the input; every connection weight is
    fixed at 1.  Layers 1..depth-1 apply the activation after adding their
    bias, the final layer is affine, and the output is clamped into [0, 1].
    """

    def __init__(self, width: int = 64, depth: int = 2, activation: str = "sigmoid"):
        if width < 1:
            raise ValueError(f"width must be >= 1, got {width}")
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {activation!r}")
        self.width = width
        self.depth = depth
        self.activation = activation
        self.biases = np.zeros((depth, width))

    @property
    def n_params(self) -> int:
        return self.depth * self.width

    def _act(self, x: np.ndarray) -> np.ndarray:
        if self.activation == "sigmoid":
            return 1.0 / (1.0 + np.exp(-x))
        return np.tanh(x)

    def _act_deriv(self, activated: np.ndarray) -> np.ndarray:
        # both derivatives are cheapest in terms of the activated value
        if self.activation == "sigmoid":
            return activated * (1.0 - activated)
        return 1.0 - activated**2


def net_forward(net: ConstrainedNet, noise) -> np.ndarray:
    """Image produced from one noise vector with the net's current biases."""
    z = np.asarray(noise, dtype=float)
    if z.shape != (net.width,):
        raise ValueError(f"expected noise of shape ({net.width},), got {z.shape}")
    h = z
    for k in range(net.depth - 1):
        h = net._act(h + net.biases[k])
    return np.clip(h + net.biases[net.depth - 1], 0.0, 1.0)


def _net_loss_and_grad(
    net: ConstrainedNet, biases: np.ndarray, noise: np.ndarray, target: np.ndarray
) -> tuple[float, np.ndarray]:
    """MSE against ``target`` and its exact per-channel chain-rule gradient."""
    hidden = []
    h = noise
    for k in range(net.depth - 1):
        h = net._act(h + biases[k])
        hidden.append(h)
    raw = h + biases[net.depth - 1]
    out = np.clip(raw, 0.0, 1.0)
    diff = out - target
    loss = float(np.mean(diff**2))
    grad = np.empty_like(biases)
    # clamp is flat outside [0, 1]; inside it passes the gradient through
    delta = (2.0 / net.width) * diff * ((raw >= 0.0) & (raw <= 1.0))
    grad[net.depth - 1] = delta
    for k in range(net.depth - 2, -1, -1):
        delta = delta * net._act_deriv(hidden[k])
        grad[k] = delta
    return loss, grad


def train_net(
    net: ConstrainedNet, target, cfg: TrainConfig, on_log=None
) -> tuple[np.ndarray, LossTrace]:
    """Minimize MSE to ``target`` with a fresh uniform noise draw per epoch."""
    t = np.asarray(target, dtype=float)
    if t.shape != (net.width,):
        raise ValueError(f"expected target of shape ({net.width},), got {t.shape}")
    rng = np.random.default_rng(cfg.seed)
    biases = rng.uniform(-cfg.init_scale, cfg.init_scale, (net.depth, net.width))
    opt = make_optimizer(cfg)
    trace = LossTrace()
    cadence = _Cadence(trace, cfg.log_every_batches, on_log)
    for epoch in range(cfg.epochs):
        noise = rng.random(net.width)
        loss, grad = _net_loss_and_grad(net, biases, noise, t)
        if epoch == 0:
            cadence.start(None, loss, biases.copy())
        biases = opt.update(biases, grad)
        cadence.step(None, loss, biases.copy())
    net.biases = biases
    return biases, trace


# ---------------------------------------------------------------------------
# quantum toy generators
# ---------------------------------------------------------------------------


class ToyQuantumGen:
    """QVC generator reading pixels off the visible register's distribution.

    Visible qubits come first, ancillas last; noise is angle-embedded on
    every qubit before the layers run.
    """

    def __init__(self, n_visible: int = 6, n_ancilla: int = 0, depth: int = 4):
        if n_visible < 1:
            raise ValueError(f"need at least one visible qubit, got {n_visible}")
        if n_ancilla < 0:
            raise ValueError(f"ancilla count must be >= 0, got {n_ancilla}")
        self.n_visible = n_visible
        self.n_ancilla = n_ancilla
        self.circuit = build_qvc_layer(n_visible + n_ancilla, depth)
        self.embedding = EmbeddingSpec("angle", n_visible + n_ancilla)

    @property
    def n_qubits(self) -> int:
        return self.n_visible + self.n_ancilla

    @property
    def n_pixels(self) -> int:
        return 2**self.n_visible

    @property
    def n_params(self) -> int:
        return self.circuit.n_params


def toy_quantum_image(gen: ToyQuantumGen, params, noise) -> np.ndarray:
    """Visible-register outcome probabilities for one noise vector.

    With ancillas this is the diagonal of the reduced state, which for a
    pure state equals the ancilla-summed Born distribution: nonnegative,
    unit sum in both modes.
    """
    z = np.asarray(noise, dtype=float)
    if z.shape != (gen.n_qubits,):
        raise ValueError(f"expected noise of shape ({gen.n_qubits},), got {z.shape}")
    initial = angle_embed(z, gen.embedding)
    final = run(gen.circuit, params, initial=initial)
    probs = np.abs(final.amplitudes) ** 2
    if gen.n_ancilla == 0:
        return probs
    return probs.reshape(gen.n_pixels, 2**gen.n_ancilla).sum(axis=1)


def _marginal_mse_cost(target: np.ndarray, n_visible: int, n_ancilla: int):
    """Adjoint-ready cost: mean squared error of the visible distribution."""
    dv, da = 2**n_visible, 2**n_ancilla

    def cost(amps: np.ndarray) -> tuple[float, np.ndarray]:
        probs = (np.abs(amps) ** 2).reshape(dv, da).sum(axis=1)
        diff = probs - target
        w = (2.0 / dv) * np.repeat(diff, da) * amps
        return float(np.mean(diff**2)), w

    return cost


def train_toy_quantum(
    gen: ToyQuantumGen, target, cfg: TrainConfig, on_log=None
) -> tuple[np.ndarray, LossTrace]:
    """Adjoint-gradient MSE training with fresh uniform noise per epoch."""
    t = np.asarray(target, dtype=float)
    if t.shape != (gen.n_pixels,):
        raise ValueError(f"expected target of shape ({gen.n_pixels},), got {t.shape}")
    rng = np.random.default_rng(cfg.seed)
    params = rng.uniform(-cfg.init_scale, cfg.init_scale, gen.n_params)
    opt = make_optimizer(cfg)
    trace = LossTrace()
    cadence = _Cadence(trace, cfg.log_every_batches, on_log)
    cost = _marginal_mse_cost(t, gen.n_visible, gen.n_ancilla)
    for epoch in range(cfg.epochs):
        noise = rng.random(gen.n_qubits)
        initial = angle_embed(noise, gen.embedding)
        loss, grad = adjoint_grad(gen.circuit, params, cost, initial=initial)
        if epoch == 0:
            cadence.start(None, loss, params.copy())
        params = opt.update(params, grad)
        cadence.step(None, loss, params.copy())
    return params, trace


# ---------------------------------------------------------------------------
# the three-way comparison
# ---------------------------------------------------------------------------


def _eval_outputs(image_fn, n_inputs: int, seed: int, draws: int) -> np.ndarray:
    """Stacked outputs for ``draws`` fresh seeded noise vectors."""
    rng = np.random.default_rng([seed, 1])
    return np.stack([image_fn(rng.random(n_inputs)) for _ in range(draws)])


def run_comparison(
    seed: int,
    cfg: TrainConfig | None = None,
    out_dir=None,
    net_depth: int = 2,
    ancillas: int = 6,
    eval_draws: int = 20,
    sample_count: int = 5,
) -> dict:
    """Train all three models on the same seeded target and report MSEs.

    The classical net fits the raw [0, 1] image directly; the quantum
    models fit the unit-sum normalized copy, the only scale their basis
    probabilities can reach.  The report carries per-model parameter
    counts, normalized- and raw-scale MSEs averaged over ``eval_draws``
    fresh noise inputs (converted through the pixel sum so every model is
    scored on both scales), and the mean per-pixel standard deviation
    across those draws (output variability, normalized scale).  With
    ``out_dir`` set, images (PGM), loss traces (CSV), per-model noise
    samples, and the report JSON are written there.
    """
    if cfg is None:
        cfg = TrainConfig(epochs=2000, learning_rate=0.01, log_every_batches=40)
    cfg = replace(cfg, seed=seed)
    raw_target, norm_target = toy_target(seed)
    scale = float(raw_target.sum())

    net = ConstrainedNet(depth=net_depth)
    _, net_trace = train_net(net, raw_target, cfg)

    pure = ToyQuantumGen(n_visible=6, n_ancilla=0)
    pure_params, pure_trace = train_toy_quantum(pure, norm_target, cfg)

    mixed = ToyQuantumGen(n_visible=6, n_ancilla=ancillas)
    mixed_params, mixed_trace = train_toy_quantum(mixed, norm_target, cfg)

    # every image_fn reports on the normalized scale; the classical net's
    # native raw output converts through the pixel sum
    models = {
        "classical": (lambda z: net_forward(net, z) / scale, 64, net.n_params, net_trace),
        "pure": (
            lambda z: toy_quantum_image(pure, pure_params, z),
            pure.n_qubits,
            pure.n_params,
            pure_trace,
        ),
        "ancilla": (
            lambda z: toy_quantum_image(mixed, mixed_params, z),
            mixed.n_qubits,
            mixed.n_params,
            mixed_trace,
        ),
    }

    report = {
        "seed": seed,
        "epochs": cfg.epochs,
        "target_sum": scale,
        "net_depth": net_depth,
        "ancillas": ancillas,
        "param_counts": {},
        "mse_norm": {},
        "mse_raw": {},
        "output_std": {},
    }
    outputs = {}
    for name, (image_fn, n_inputs, n_params, _) in models.items():
        outs = _eval_outputs(image_fn, n_inputs, seed, eval_draws)
        outputs[name] = outs
        report["param_counts"][name] = n_params
        report["mse_norm"][name] = float(np.mean((outs - norm_target) ** 2))
        report["mse_raw"][name] = float(np.mean((outs * scale - raw_target) ** 2))
        report["output_std"][name] = float(np.mean(outs.std(axis=0)))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_pgm(os.path.join(out_dir, "target.pgm"), raw_target.reshape(8, 8))
        for name, (_, _, _, trace) in models.items():
            trace.to_csv(os.path.join(out_dir, f"{name}_loss.csv"))
            mean_img = np.clip(outputs[name].mean(axis=0) * scale, 0.0, 1.0)
            write_pgm(os.path.join(out_dir, f"{name}_image.pgm"), mean_img.reshape(8, 8))
            for i in range(min(sample_count, eval_draws)):
                sample = np.clip(outputs[name][i] * scale, 0.0, 1.0)
                write_pgm(
                    os.path.join(out_dir, f"{name}_sample{i}.pgm"),
                    sample.reshape(8, 8),
                )
        with open(os.path.join(out_dir, "report.json"), "w", encoding="ascii") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return report
