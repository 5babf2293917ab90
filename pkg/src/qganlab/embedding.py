"""Encodings between classical feature vectors and quantum states.

Angle embedding maps each feature f in [0, 1] to one qubit via
RY(scale * f)|0> (default scale pi), producing a product state whose
per-qubit |1> probability grows monotonically with the feature.  Amplitude
embedding packs a whole vector into the amplitudes of ceil(log2(len))
qubits, returning the norm needed to undo the rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import ProductState, StateVector

FEATURE_ATOL = 1e-9
PRODUCT_PURITY_TOL = 1e-6


@dataclass(frozen=True)
class EmbeddingSpec:
    """How classical vectors become states: kind, register width, scale."""

    kind: str
    n_qubits: int
    angle_scale: float = math.pi

    def __post_init__(self) -> None:
        if self.kind not in ("angle", "amplitude"):
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ValueError("embedding needs at least one qubit")
        if self.kind == "angle" and not 0.0 < self.angle_scale <= math.pi:
            raise ValueError(
                f"angle scale must lie in (0, pi], got {self.angle_scale!r}"
            )


def _check_features(features: np.ndarray, n_qubits: int) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    if f.shape != (n_qubits,):
        raise ValueError(
            f"expected {n_qubits} features for {n_qubits} qubits, got shape {f.shape}"
        )
    if float(f.min()) < -FEATURE_ATOL or float(f.max()) > 1.0 + FEATURE_ATOL:
        raise ValueError(
            f"features must lie in [0, 1], got range "
            f"[{float(f.min())!r}, {float(f.max())!r}]"
        )
    return np.clip(f, 0.0, 1.0)


def angle_factors(features: np.ndarray, angle_scale: float = math.pi) -> np.ndarray:
    """Per-qubit 2-vectors [cos(a/2), sin(a/2)] with a = scale * f."""
    half = 0.5 * angle_scale * np.asarray(features, dtype=float)
    return np.stack([np.cos(half), np.sin(half)], axis=1).astype(complex)


def angle_embed(features, spec: EmbeddingSpec) -> StateVector:
    """Dense product state tensor_i RY(scale * f_i)|0>."""
    if spec.kind != "angle":
        raise ValueError(f"angle_embed needs an angle spec, got {spec.kind!r}")
    f = _check_features(features, spec.n_qubits)
    factors = angle_factors(f, spec.angle_scale)
    amps = np.array([1.0], dtype=complex)
    for q in range(spec.n_qubits):
        amps = np.kron(amps, factors[q])
    return StateVector(spec.n_qubits, amps)


def angle_embed_product(features, spec: EmbeddingSpec) -> ProductState:
    """Factorized form of :func:`angle_embed`; scales to hundreds of qubits."""
    if spec.kind != "angle":
        raise ValueError(f"angle_embed_product needs an angle spec, got {spec.kind!r}")
    f = _check_features(features, spec.n_qubits)
    return ProductState(spec.n_qubits, angle_factors(f, spec.angle_scale))


def state_matrix_from_angles(angles: np.ndarray) -> np.ndarray:
    """Stacked amplitudes of per-qubit RY(angle)|0> products, one row each.

    ``angles`` has shape (count, n_qubits); row i of the result holds the
    2**n_qubits real amplitudes of tensor_q RY(angles[i, q])|0>, built by an
    iterated Kronecker expansion vectorized over the batch.
    """
    a = np.asarray(angles, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a (count, n_qubits) array, got shape {a.shape}")
    half = 0.5 * a
    cos, sin = np.cos(half), np.sin(half)
    out = np.ones((a.shape[0], 1))
    for q in range(a.shape[1]):
        two = np.stack([cos[:, q], sin[:, q]], axis=1)
        out = (out[:, :, None] * two[:, None, :]).reshape(a.shape[0], -1)
    return out


def angle_state_matrix(features: np.ndarray, angle_scale: float = math.pi) -> np.ndarray:
    """Amplitudes of angle-embedded feature rows: (count, 2**n_qubits).

    Row i equals ``angle_embed(features[i], ...).amplitudes`` (real).
    """
    return state_matrix_from_angles(angle_scale * np.asarray(features, dtype=float))


def amplitude_embed(vector, n_qubits: int) -> tuple[StateVector, float]:
    """Pack a real vector into amplitudes; returns (state, Euclidean norm).

    The vector is zero-padded up to 2**n_qubits and divided by its norm;
    the all-zero vector has no direction and is rejected.
    """
    v = np.asarray(vector, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a flat vector, got shape {v.shape}")
    dim = 2**n_qubits
    if len(v) > dim:
        raise ValueError(f"vector of length {len(v)} exceeds {dim} amplitudes")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot amplitude-embed the zero vector")
    amps = np.zeros(dim, dtype=complex)
    amps[: len(v)] = v / norm
    return StateVector(n_qubits, amps), norm


def _marginal_prob_one(state: StateVector, qubit: int) -> tuple[float, float]:
    """(P(1), purity) of one qubit's reduced 2x2 matrix."""
    psi = state.amplitudes.reshape((2,) * state.n_qubits)
    zero = np.take(psi, 0, axis=qubit).reshape(-1)
    one = np.take(psi, 1, axis=qubit).reshape(-1)
    p00 = float(np.sum(np.abs(zero) ** 2))
    p11 = float(np.sum(np.abs(one) ** 2))
    off = complex(np.sum(zero * one.conj()))
    purity = p00 * p00 + p11 * p11 + 2.0 * abs(off) ** 2
    return p11, purity


def qubit_marginal_features(state, angle_scale: float = math.pi) -> np.ndarray:
    """Per-qubit features recovered from marginal |1> probabilities.

    Inverts the angle embedding qubit by qubit without requiring a product
    state; on entangled inputs this is lossy (it only sees the marginals).
    """
    if isinstance(state, ProductState):
        p1 = np.abs(state.factors[:, 1]) ** 2
    elif isinstance(state, StateVector):
        p1 = np.array(
            [_marginal_prob_one(state, q)[0] for q in range(state.n_qubits)]
        )
    else:
        raise TypeError(f"expected StateVector or ProductState, got {type(state)!r}")
    angles = 2.0 * np.arcsin(np.sqrt(np.clip(p1, 0.0, 1.0)))
    return np.clip(angles / angle_scale, 0.0, 1.0)


def angle_decode(state, angle_scale: float = math.pi) -> np.ndarray:
    """Recover features from an angle-embedded state.

    StateVector inputs must be product states: each qubit's reduced purity
    has to reach 1 - 1e-6, otherwise the state is entangled and per-qubit
    angles do not determine it; use amplitude decoding instead.
    """
    if isinstance(state, StateVector):
        for q in range(state.n_qubits):
            _, purity = _marginal_prob_one(state, q)
            if purity < 1.0 - PRODUCT_PURITY_TOL:
                raise ValueError(
                    f"qubit {q} has reduced purity {purity!r}: state is not a "
                    "product state; use amplitude decoding instead"
                )
    return qubit_marginal_features(state, angle_scale)


def amplitude_decode(state: StateVector, length: int, norm: float) -> np.ndarray:
    """Magnitudes of the first ``length`` amplitudes, rescaled by ``norm``."""
    if length < 1 or length > len(state.amplitudes):
        raise ValueError(
            f"length {length} out of range for {len(state.amplitudes)} amplitudes"
        )
    return np.abs(state.amplitudes[:length]) * float(norm)
