"""Losses, gradients, optimizers, and the three training loops.

Gradient routes
---------------
``parameter_shift_grad`` implements the exact two-term shift rule: every
parametric gate here has a generator with eigenvalues +-1/2, so the
derivative of any expectation-affine loss with respect to one gate angle
is (L(+pi/2) - L(-pi/2)) / 2, summed over the gates sharing a parameter
with their +-1/2 scales.  The rule is exact only for losses affine in the
circuit's output expectations; GAN losses take logs of swap-test values,
so the loops below differentiate the vector of swap-test outputs with the
shift rule and chain the analytic log derivatives outside the circuit.

``adjoint_grad`` is a reverse-mode pass over the gate list for losses that
are smooth functions of the final amplitudes (used by the larger toy
circuits where 2 * n_gates shift evaluations would be wasteful); tests pin
it against the shift rule and finite differences.

Determinism
-----------
All randomness flows from ``numpy.random.default_rng(cfg.seed)`` in a
fixed draw order (parameter init, then per-epoch shuffles and noise), so a
config reproduces its loss trace bit for bit.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embedding import angle_embed, state_matrix_from_angles
from .models import IqganModel, ProductIqgan, QuganModel
from .qcore import Circuit, StateVector, _apply_unitary, gate_unitary, resolve_angle, run

LOG_CLAMP_FLOOR = 1e-12

_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_Y, _Y)


# ---------------------------------------------------------------------------
# configuration and traces
# ---------------------------------------------------------------------------


def parse_noise(spec: str) -> tuple[str, float]:
    """Validate a noise spec: "none", "uniform01", or "gaussian:<sigma>"."""
    if spec == "none":
        return ("none", 0.0)
    if spec == "uniform01":
        return ("uniform01", 0.0)
    if spec.startswith("gaussian:"):
        sigma = float(spec.split(":", 1)[1])
        if sigma <= 0.0:
            raise ValueError(f"gaussian noise needs sigma > 0, got {sigma!r}")
        return ("gaussian", sigma)
    raise ValueError(
        f"unknown noise spec {spec!r}; expected none, uniform01 or gaussian:<sigma>"
    )


@dataclass
class TrainConfig:
    """Shared knobs for every training loop.

    ``noise`` draws per-sample generator input features: "uniform01" is
    uniform on [0, 1], "gaussian:<sigma>" is a centered normal clipped into
    the feature range.  ``rescale_swap`` maps swap-test probabilities (which
    floor at 1/2) onto [0, 1] via D = 2 P(0) - 1 before any logarithm;
    ``saturating`` switches the generator to the log(1 - D) form.
    """

    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 0.01
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    log_every_batches: int = 40
    noise: str = "none"
    init_scale: float = 0.1
    rescale_swap: bool = True
    saturating: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.log_every_batches < 1:
            raise ValueError("log_every_batches must be >= 1")
        if self.init_scale < 0.0:
            raise ValueError("init_scale must be >= 0")
        parse_noise(self.noise)


def draw_noise(cfg: TrainConfig, rng: np.random.Generator, shape) -> np.ndarray | None:
    """Per-sample noise features for the configured kind, or None."""
    kind, sigma = parse_noise(cfg.noise)
    if kind == "none":
        return None
    if kind == "uniform01":
        return rng.random(shape)
    return np.clip(rng.normal(0.0, sigma, shape), 0.0, 1.0)


@dataclass
class LossTrace:
    """Loss samples at a fixed batch cadence; row = (batch, loss_d, loss_g).

    The first row is the pre-update loss at batch 0; afterwards one row is
    appended every ``log_every_batches`` completed batches.  Architectures
    without a discriminator leave loss_d empty.
    """

    rows: list[tuple[int, float | None, float]] = field(default_factory=list)

    HEADER = "batch,loss_d,loss_g"

    def append(self, batch: int, loss_d: float | None, loss_g: float) -> None:
        if self.rows and batch <= self.rows[-1][0]:
            raise ValueError("batch indices must strictly increase")
        self.rows.append((int(batch), loss_d, float(loss_g)))

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        buf.write(self.HEADER + "\n")
        for batch, loss_d, loss_g in self.rows:
            d = "" if loss_d is None else repr(float(loss_d))
            buf.write(f"{batch},{d},{loss_g!r}\n")
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv_string())

    @classmethod
    def from_csv(cls, path) -> "LossTrace":
        trace = cls()
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip()
            if header != cls.HEADER:
                raise ValueError(f"unexpected loss-trace header {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                batch, d, g = line.split(",")
                trace.append(int(batch), None if d == "" else float(d), float(g))
        return trace


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------


def gan_value(d_real, d_fake) -> float:
    """Adversarial value mean(log D(x)) + mean(log(1 - D(G(z)))).

    Both log arguments are clamped below at 1e-12 so orthogonal-state
    discriminator outputs stay finite.
    """
    dr = np.asarray(d_real, dtype=float)
    df = np.asarray(d_fake, dtype=float)
    if dr.size == 0 or df.size == 0:
        raise ValueError("gan_value needs at least one real and one fake output")
    real_term = np.log(np.maximum(dr, LOG_CLAMP_FLOOR))
    fake_term = np.log(np.maximum(1.0 - df, LOG_CLAMP_FLOOR))
    return float(np.mean(real_term) + np.mean(fake_term))


def _clamped_log_grad(values: np.ndarray) -> np.ndarray:
    """d/dv mean(log(max(v, floor))): zero where the clamp is active."""
    v = np.asarray(values, dtype=float)
    grad = np.zeros_like(v)
    live = v > LOG_CLAMP_FLOOR
    grad[live] = 1.0 / (v[live] * v.size)
    return grad


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def parameter_shift_grad(loss_at, circuit: Circuit, params) -> np.ndarray:
    """Exact two-term shift-rule gradient of an expectation-affine loss.

    ``loss_at(params, gate_shifts=None)`` evaluates the loss, honoring a
    per-gate angle offset array; it may return a scalar or a vector (the
    result is then the Jacobian with shape (n_params, ...)).  For each
    parametric gate g the contribution is scale_g * (L(+pi/2 at g) -
    L(-pi/2 at g)) / 2, summed over gates sharing a parameter.
    """
    params = np.asarray(params, dtype=float)
    n_gates = len(circuit.gates)
    grad: np.ndarray | None = None
    for pos in circuit.parametric_positions():
        gate = circuit.gates[pos]
        shifts = np.zeros(n_gates)
        shifts[pos] = 0.5 * math.pi
        up = np.asarray(loss_at(params, shifts), dtype=float)
        shifts[pos] = -0.5 * math.pi
        down = np.asarray(loss_at(params, shifts), dtype=float)
        term = gate.param.scale * 0.5 * (up - down)
        if grad is None:
            grad = np.zeros((circuit.n_params,) + term.shape)
        grad[gate.param.index] += term
    if grad is None:
        grad = np.zeros(circuit.n_params)
    return grad


def _apply_generator(amps: np.ndarray, kind: str, wires, n_qubits: int) -> np.ndarray:
    """(-i/2) x (rotation generator) applied to an amplitude array."""
    if kind == "RY":
        return _apply_unitary(amps, -0.5j * _Y, wires, n_qubits)
    if kind == "RYY":
        return _apply_unitary(amps, -0.5j * _YY, wires, n_qubits)
    raise ValueError(f"gate kind {kind!r} has no rotation generator")


def adjoint_grad(
    circuit: Circuit,
    params,
    value_and_cost_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    initial: StateVector | None = None,
) -> tuple[float, np.ndarray]:
    """Reverse-mode gradient for losses that are smooth in the final state.

    ``value_and_cost_grad(amps)`` returns (L, w) with w[b] = dL/d conj(amps[b]);
    for L = sum_b f_b(|amps_b|^2) that is w = f'(p) * amps.  One forward pass
    plus one backward pass replaces the 2 * n_gates circuit evaluations of
    the shift rule; both routes agree to machine precision on shared cases.
    """
    params = np.asarray(params, dtype=float)
    final = run(circuit, params, initial=initial)
    psi = final.amplitudes.copy()
    value, cograd = value_and_cost_grad(psi)
    lam = np.asarray(cograd, dtype=complex)
    if lam.shape != psi.shape:
        raise ValueError("cost gradient must match the amplitude vector")
    grad = np.zeros(circuit.n_params)
    n = circuit.n_qubits
    for i in range(len(circuit.gates) - 1, -1, -1):
        gate = circuit.gates[i]
        angle = resolve_angle(gate, params)
        if gate.param is not None:
            gen_psi = _apply_generator(psi, gate.kind, gate.wires, n)
            contrib = 2.0 * float(np.real(np.vdot(lam, gen_psi)))
            grad[gate.param.index] += gate.param.scale * contrib
        u_dag = gate_unitary(gate.kind, angle).conj().T
        psi = _apply_unitary(psi, u_dag, gate.wires, n)
        lam = _apply_unitary(lam, u_dag, gate.wires, n)
    return float(value), grad


def finite_difference_grad(loss_at, params, h: float = 1e-5) -> np.ndarray:
    """Central finite differences; the reference oracle for gradient tests."""
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for k in range(len(params)):
        up, down = params.copy(), params.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (loss_at(up) - loss_at(down)) / (2.0 * h)
    return grad


# ---------------------------------------------------------------------------
# optimizers
# ---------------------------------------------------------------------------


class SgdOptimizer:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return params - self.learning_rate * grad


class AdamOptimizer:
    """Standard Adam with bias correction."""

    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m: np.ndarray | None = None
        self.v: np.ndarray | None = None
        self.t = 0

    def update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "sgd":
        return SgdOptimizer(cfg.learning_rate)
    return AdamOptimizer(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)


# ---------------------------------------------------------------------------
# shared loop helpers
# ---------------------------------------------------------------------------


def _check_features(features, n_qubits: int) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    if f.ndim != 2 or f.shape[1] != n_qubits:
        raise ValueError(
            f"expected a (count, {n_qubits}) feature array, got shape {f.shape}"
        )
    if f.shape[0] == 0:
        raise ValueError("training needs at least one sample")
    if float(f.min()) < -1e-9 or float(f.max()) > 1.0 + 1e-9:
        raise ValueError("features must lie in [0, 1]")
    return np.clip(f, 0.0, 1.0)


class _Cadence:
    """Emits trace rows and snapshot callbacks at the logging cadence."""

    def __init__(self, trace: LossTrace, every: int, on_log=None):
        self.trace = trace
        self.every = every
        self.on_log = on_log
        self.completed = 0

    def start(self, loss_d, loss_g, snapshot) -> None:
        self.trace.append(0, loss_d, loss_g)
        if self.on_log is not None:
            self.on_log(0, snapshot)

    def step(self, loss_d, loss_g, snapshot) -> None:
        self.completed += 1
        if self.completed % self.every == 0:
            self.trace.append(self.completed, loss_d, loss_g)
            if self.on_log is not None:
                self.on_log(self.completed, snapshot)


# ---------------------------------------------------------------------------
# IQGAN: swap-test probability is the loss
# ---------------------------------------------------------------------------


def _iqgan_loss_and_grad(
    model: IqganModel,
    params: np.ndarray,
    feats: np.ndarray,
    noise: np.ndarray | None,
) -> tuple[float, np.ndarray]:
    """Batch loss mean(1 - P0) and its exact shift-rule gradient.

    The swap-test probability is evaluated through the overlap identity
    P0 = 1/2 + 1/2 |<x_i|gamma>|^2 (the full-circuit route is pinned equal
    in tests), so one loss evaluation is a generator run plus a mat-vec.
    """
    gen = model.generator
    n_gen = model.n_gen_params
    scale = model.embedding.angle_scale
    offsets = params[n_gen:] if model.trainable_encoder else None

    def batch_loss(gate_shifts=None, offset_shift=None) -> float:
        angles = scale * feats
        if offsets is not None:
            angles = angles + offsets
        if offset_shift is not None:
            q, delta = offset_shift
            angles = angles.copy()
            angles[:, q] += delta
        x = state_matrix_from_angles(angles)
        if noise is None:
            gamma = run(gen, params[:n_gen], gate_shifts=gate_shifts).amplitudes
            overlaps = np.abs(x @ gamma.conj()) ** 2
        else:
            overlaps = np.empty(len(feats))
            for i in range(len(feats)):
                init = angle_embed(noise[i], model.embedding)
                gamma = run(
                    gen, params[:n_gen], initial=init, gate_shifts=gate_shifts
                ).amplitudes
                overlaps[i] = np.abs(np.dot(x[i], gamma.conj())) ** 2
        return float(0.5 - 0.5 * np.mean(overlaps))

    loss = batch_loss()
    grad = np.zeros_like(params)
    n_gates = len(gen.gates)
    for pos in gen.parametric_positions():
        gate = gen.gates[pos]
        shifts = np.zeros(n_gates)
        shifts[pos] = 0.5 * math.pi
        up = batch_loss(gate_shifts=shifts)
        shifts[pos] = -0.5 * math.pi
        down = batch_loss(gate_shifts=shifts)
        grad[gate.param.index] += gate.param.scale * 0.5 * (up - down)
    if model.trainable_encoder:
        # each sample's encoder rotation is its own gate, but a simultaneous
        # shift still yields the exact per-parameter derivative because every
        # per-sample term touches the offset through one gate only
        for q in range(model.n_qubits):
            up = batch_loss(offset_shift=(q, 0.5 * math.pi))
            down = batch_loss(offset_shift=(q, -0.5 * math.pi))
            grad[n_gen + q] += 0.5 * (up - down)
    return loss, grad


def train_iqgan(
    model: IqganModel, features, cfg: TrainConfig, on_log=None
) -> tuple[np.ndarray, LossTrace]:
    """Minimize the mean swap-test miss 1 - P0 over the training samples.

    Returns the trained parameter vector and the loss trace (loss_d empty:
    this architecture has no separate discriminator).  ``on_log(batch,
    params)`` fires at every trace row with the current snapshot.
    """
    feats = _check_features(features, model.n_qubits)
    rng = np.random.default_rng(cfg.seed)
    params = rng.uniform(-cfg.init_scale, cfg.init_scale, model.n_params)
    opt = make_optimizer(cfg)
    trace = LossTrace()
    cadence = _Cadence(trace, cfg.log_every_batches, on_log)
    n = len(feats)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            noise = draw_noise(cfg, rng, (len(idx), model.n_qubits))
            loss, grad = _iqgan_loss_and_grad(model, params, feats[idx], noise)
            if epoch == 0 and start == 0:
                cadence.start(None, loss, params.copy())
            params = opt.update(params, grad)
            cadence.step(None, loss, params.copy())
    return params, trace


# ---------------------------------------------------------------------------
# QuGAN: adversarial steps over two circuits
# ---------------------------------------------------------------------------


def _swap_outputs(states: np.ndarray, reference: np.ndarray, rescale: bool) -> np.ndarray:
    """Discriminator outputs for stacked states against one reference state."""
    overlaps = np.abs(states @ reference.conj()) ** 2
    return overlaps if rescale else 0.5 + 0.5 * overlaps


def _generator_states(
    model: QuganModel, gen_params: np.ndarray, noise: np.ndarray | None, gate_shifts=None
) -> np.ndarray:
    """Stacked generator outputs, one row per noise draw (single row if none)."""
    if noise is None:
        gamma = run(model.generator, gen_params, gate_shifts=gate_shifts)
        return gamma.amplitudes[None, :]
    rows = []
    for z in noise:
        init = angle_embed(z, model.embedding)
        rows.append(
            run(model.generator, gen_params, initial=init, gate_shifts=gate_shifts).amplitudes
        )
    return np.stack(rows)


def train_qugan(
    model: QuganModel,
    features,
    cfg: TrainConfig,
    disc_steps: int = 1,
    freeze_generator: bool = False,
    on_log=None,
) -> tuple[np.ndarray, np.ndarray, LossTrace]:
    """Alternating swap-test adversary: disc ascends the value, gen descends.

    Discriminator outputs are differentiated as a vector with the shift
    rule and the clamped-log derivatives are chained analytically, keeping
    every gradient exact.  ``disc_steps`` discriminator updates run per
    generator update; ``freeze_generator`` trains the discriminator alone
    (the generator loss is still traced).  Returns (disc_params,
    gen_params, trace) with rows (batch, loss_d, loss_g), loss_d = -V.
    """
    feats = _check_features(features, model.n_qubits)
    if disc_steps < 1:
        raise ValueError("disc_steps must be >= 1")
    rng = np.random.default_rng(cfg.seed)
    disc_params = rng.uniform(-cfg.init_scale, cfg.init_scale, model.discriminator.n_params)
    gen_params = rng.uniform(-cfg.init_scale, cfg.init_scale, model.generator.n_params)
    opt_d = make_optimizer(cfg)
    opt_g = make_optimizer(cfg)
    trace = LossTrace()
    cadence = _Cadence(trace, cfg.log_every_batches, on_log)
    x_all = state_matrix_from_angles(model.embedding.angle_scale * feats)
    n = len(feats)

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            x_batch = x_all[idx]
            noise = draw_noise(cfg, rng, (len(idx), model.n_qubits))

            loss_d = loss_g = None
            for _ in range(disc_steps):
                fake = _generator_states(model, gen_params, noise)

                def disc_outputs(p, gate_shifts=None):
                    delta = run(
                        model.discriminator, p, gate_shifts=gate_shifts
                    ).amplitudes
                    d_real = _swap_outputs(x_batch, delta, cfg.rescale_swap)
                    d_fake = _swap_outputs(fake, delta, cfg.rescale_swap)
                    return np.concatenate([d_real, d_fake])

                outs = disc_outputs(disc_params)
                d_real, d_fake = outs[: len(x_batch)], outs[len(x_batch) :]
                value = gan_value(d_real, d_fake)
                jac = parameter_shift_grad(
                    disc_outputs, model.discriminator, disc_params
                )
                w_real = _clamped_log_grad(d_real)
                w_fake = -_clamped_log_grad(1.0 - d_fake)
                ascent = jac @ np.concatenate([w_real, w_fake])
                disc_params = opt_d.update(disc_params, -ascent)
                loss_d = -value

            delta_now = run(model.discriminator, disc_params).amplitudes

            def gen_outputs(p, gate_shifts=None):
                fake = _generator_states(model, gen_params=p, noise=noise,
                                         gate_shifts=gate_shifts)
                return _swap_outputs(fake, delta_now, cfg.rescale_swap)

            d_fake_now = gen_outputs(gen_params)
            if cfg.saturating:
                loss_g = float(np.mean(np.log(np.maximum(1.0 - d_fake_now, LOG_CLAMP_FLOOR))))
                w_gen = -_clamped_log_grad(1.0 - d_fake_now)
            else:
                loss_g = -float(np.mean(np.log(np.maximum(d_fake_now, LOG_CLAMP_FLOOR))))
                w_gen = -_clamped_log_grad(d_fake_now)
            if not freeze_generator:
                jac_g = parameter_shift_grad(gen_outputs, model.generator, gen_params)
                gen_params = opt_g.update(gen_params, jac_g @ w_gen)

            if epoch == 0 and start == 0:
                cadence.start(loss_d, loss_g, (disc_params.copy(), gen_params.copy()))
            cadence.step(loss_d, loss_g, (disc_params.copy(), gen_params.copy()))
    return disc_params, gen_params, trace


# ---------------------------------------------------------------------------
# product model: independent per-pixel objectives
# ---------------------------------------------------------------------------


def _product_pixel_losses(
    theta: np.ndarray, target_angles: np.ndarray, noise_angles: np.ndarray | None
) -> np.ndarray:
    """Per-pixel 1 - mean_i cos^2((theta_p [+ z_ip] - a_ip) / 2)."""
    total = theta[None, :] if noise_angles is None else theta[None, :] + noise_angles
    fid = np.cos(0.5 * (total - target_angles)) ** 2
    return 1.0 - fid.mean(axis=0)


def train_product(
    model: ProductIqgan, images, cfg: TrainConfig, on_log=None
) -> tuple[np.ndarray, LossTrace]:
    """Maximize mean per-pixel fidelity to angle-encoded target pixels.

    Pixels are fully decoupled, so each angle steps on its own derivative
    (the simultaneous shift of all pixels is still the exact two-term rule
    per pixel); the trace logs the mean per-pixel loss.
    """
    imgs = _check_features(images, model.n_pixels)
    rng = np.random.default_rng(cfg.seed)
    theta = rng.uniform(-cfg.init_scale, cfg.init_scale, model.n_pixels)
    opt = make_optimizer(cfg)
    trace = LossTrace()
    cadence = _Cadence(trace, cfg.log_every_batches, on_log)
    scale = model.angle_scale
    n = len(imgs)
    half_pi = 0.5 * math.pi
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            target_angles = scale * imgs[idx]
            noise = draw_noise(cfg, rng, (len(idx), model.n_pixels))
            noise_angles = None if noise is None else scale * noise
            losses = _product_pixel_losses(theta, target_angles, noise_angles)
            grad = 0.5 * (
                _product_pixel_losses(theta + half_pi, target_angles, noise_angles)
                - _product_pixel_losses(theta - half_pi, target_angles, noise_angles)
            )
            loss = float(losses.mean())
            if epoch == 0 and start == 0:
                cadence.start(None, loss, theta.copy())
            theta = opt.update(theta, grad)
            cadence.step(None, loss, theta.copy())
    return theta, trace
