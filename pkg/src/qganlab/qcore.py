"""Exact statevector and density-matrix simulation primitives.

Conventions used throughout the package:

* Qubit 0 is the MOST significant bit of a basis-state index: an n-qubit
  basis state |q0 q1 ... q_{n-1}> lives at index sum_k q_k * 2**(n-1-k).
  Tensor products therefore compose with ``np.kron`` in qubit order.
* Rotations follow the half-angle convention RY(t) = exp(-i t Y / 2) and
  RYY(t) = exp(-i t (Y x Y) / 2), so every parametric gate has a generator
  with eigenvalues +-1/2 and the two-term parameter-shift rule is exact.
* Controlled-RY is never a primitive gate kind; ``cry_gates`` returns its
  four-gate decomposition [RY(t/2) on target, CNOT, RY(-t/2) on target,
  CNOT] whose two rotations share one parameter with scales +-1/2.
* States, gates and circuits are immutable after construction; every
  operation returns fresh arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

GATE_ARITY = {"RY": 1, "RYY": 2, "H": 1, "X": 1, "CNOT": 2, "CSWAP": 3}
PARAMETRIC_KINDS = ("RY", "RYY")

_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y_MATRIX = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)

# Control is the first wire: basis order |c t> = 00, 01, 10, 11.
_CNOT_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

# Control first, then the two swapped wires: |1 0 1> <-> |1 1 0>.
_CSWAP_MATRIX = np.eye(8, dtype=complex)
_CSWAP_MATRIX[5, 5] = _CSWAP_MATRIX[6, 6] = 0.0
_CSWAP_MATRIX[5, 6] = _CSWAP_MATRIX[6, 5] = 1.0


def ry_matrix(theta: float) -> np.ndarray:
    """2x2 matrix of RY(theta) = exp(-i theta Y / 2)."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def ryy_matrix(theta: float) -> np.ndarray:
    """4x4 matrix of RYY(theta) = exp(-i theta (Y x Y) / 2).

    Y x Y is the real antidiagonal matrix antidiag(-1, 1, 1, -1), so the
    exponential is cos(t/2) I - i sin(t/2) (Y x Y).
    """
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    m = np.diag([c, c, c, c]).astype(complex)
    m[0, 3] = 1j * s
    m[3, 0] = 1j * s
    m[1, 2] = -1j * s
    m[2, 1] = -1j * s
    return m


def cry_matrix(theta: float) -> np.ndarray:
    """Direct 4x4 controlled-RY (control = first wire); test reference."""
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = ry_matrix(theta)
    return m


def gate_unitary(kind: str, angle: float = 0.0) -> np.ndarray:
    """Dense unitary of a primitive gate kind at the given angle."""
    if kind == "RY":
        return ry_matrix(angle)
    if kind == "RYY":
        return ryy_matrix(angle)
    if kind == "H":
        return _H_MATRIX.copy()
    if kind == "X":
        return _X_MATRIX.copy()
    if kind == "CNOT":
        return _CNOT_MATRIX.copy()
    if kind == "CSWAP":
        return _CSWAP_MATRIX.copy()
    raise ValueError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class ParamRef:
    """Reference from a gate into a parameter vector.

    The resolved gate angle is ``params[index] * scale``; the +-1/2 scales
    of the controlled-RY decomposition keep shared parameters compatible
    with the two-term parameter-shift rule.
    """

    index: int
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"parameter index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class Gate:
    """One primitive gate: a kind, target wires, and an angle source.

    The resolved angle is ``angle + params[param.index] * param.scale``
    (the fixed part doubles as a constant offset under a parameter, which
    is how data-dependent encoder rotations carry trainable offsets).
    Angles are only meaningful for parametric kinds; the rest ignore them.
    """

    kind: str
    wires: tuple[int, ...]
    param: ParamRef | None = None
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        wires = tuple(int(w) for w in self.wires)
        object.__setattr__(self, "wires", wires)
        if len(wires) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} wires, got {wires}"
            )
        if len(set(wires)) != len(wires):
            raise ValueError(f"gate wires must be distinct, got {wires}")
        if any(w < 0 for w in wires):
            raise ValueError(f"gate wires must be >= 0, got {wires}")
        if self.param is not None and self.kind not in PARAMETRIC_KINDS:
            raise ValueError(f"{self.kind} gates take no parameter")


def cry_gates(
    control: int, target: int, param: int | None = None, angle: float = 0.0
) -> tuple[Gate, ...]:
    """Four-gate decomposition of controlled-RY(angle) on (control, target).

    When ``param`` is given the two rotations reference params[param] with
    scales +1/2 and -1/2; otherwise the fixed angle is split the same way.
    """
    if param is not None:
        first = Gate("RY", (target,), ParamRef(param, 0.5))
        second = Gate("RY", (target,), ParamRef(param, -0.5))
    else:
        first = Gate("RY", (target,), angle=angle / 2.0)
        second = Gate("RY", (target,), angle=-angle / 2.0)
    cnot = Gate("CNOT", (control, target))
    return (first, cnot, second, cnot)


@dataclass(frozen=True)
class Circuit:
    """Immutable gate list over ``n_qubits`` wires with ``n_params`` knobs."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.wires) >= self.n_qubits:
                raise ValueError(
                    f"gate {g.kind} on wires {g.wires} exceeds {self.n_qubits} qubits"
                )
            if g.param is not None and g.param.index >= self.n_params:
                raise ValueError(
                    f"gate references parameter {g.param.index} but circuit "
                    f"declares only {self.n_params}"
                )

    def parametric_positions(self) -> list[int]:
        """Indices into ``gates`` of every parameterized gate."""
        return [i for i, g in enumerate(self.gates) if g.param is not None]


def resolve_angle(gate: Gate, params: np.ndarray, shift: float = 0.0) -> float:
    """Angle a gate runs at for the given parameter vector and extra shift."""
    angle = gate.angle + shift
    if gate.param is not None:
        angle += float(params[gate.param.index]) * gate.param.scale
    return angle


@dataclass(frozen=True)
class StateVector:
    """Pure state of ``n_qubits`` qubits; 2**n complex amplitudes, MSB-first."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.n_qubits < 1:
            raise ValueError("state needs at least one qubit")
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} "
                f"qubits, got shape {amps.shape}"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_ATOL * max(1.0, math.sqrt(len(amps))):
            raise ValueError(f"state is not normalized: |psi|^2 = {norm!r}")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex]) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(len(amps))))
        if 2**n != len(amps):
            raise ValueError(f"amplitude count {len(amps)} is not a power of two")
        return cls(n, amps)


def _apply_unitary(
    amps: np.ndarray, u: np.ndarray, wires: tuple[int, ...], n_qubits: int
) -> np.ndarray:
    """Apply a 2^k x 2^k unitary to the named wires of a flat amplitude array."""
    k = len(wires)
    psi = amps.reshape((2,) * n_qubits)
    moved = np.moveaxis(psi, wires, tuple(range(k)))
    shape = moved.shape
    out = u @ np.ascontiguousarray(moved).reshape(2**k, -1)
    out = out.reshape(shape)
    return np.moveaxis(out, tuple(range(k)), wires).reshape(-1)


def apply_gate(state: StateVector, gate: Gate, angle: float | None = None) -> StateVector:
    """Apply one gate and return the new state.

    ``angle`` overrides the gate's angle source when given; parameter
    references are resolved by :func:`run`, not here.
    """
    if max(gate.wires) >= state.n_qubits:
        raise ValueError(
            f"gate {gate.kind} on wires {gate.wires} exceeds {state.n_qubits} qubits"
        )
    a = gate.angle if angle is None else float(angle)
    u = gate_unitary(gate.kind, a)
    return StateVector(
        state.n_qubits, _apply_unitary(state.amplitudes, u, gate.wires, state.n_qubits)
    )


def run(
    circuit: Circuit,
    params: Sequence[float],
    initial: StateVector | None = None,
    gate_shifts: np.ndarray | None = None,
) -> StateVector:
    """Run a circuit on ``initial`` (default |0...0>) with resolved parameters.

    ``gate_shifts``, when given, adds a per-gate angle offset (length equal
    to ``len(circuit.gates)``); this is the hook the parameter-shift rule
    uses to shift a single gate of a shared parameter.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise ValueError(
            f"circuit declares {circuit.n_params} parameters, got {params.shape}"
        )
    if initial is None:
        amps = np.zeros(2**circuit.n_qubits, dtype=complex)
        amps[0] = 1.0
    else:
        if initial.n_qubits != circuit.n_qubits:
            raise ValueError(
                f"initial state has {initial.n_qubits} qubits, circuit "
                f"has {circuit.n_qubits}"
            )
        amps = initial.amplitudes.copy()
    if gate_shifts is not None and len(gate_shifts) != len(circuit.gates):
        raise ValueError("gate_shifts must have one entry per gate")
    for i, gate in enumerate(circuit.gates):
        shift = 0.0 if gate_shifts is None else float(gate_shifts[i])
        angle = resolve_angle(gate, params, shift)
        u = gate_unitary(gate.kind, angle)
        amps = _apply_unitary(amps, u, gate.wires, circuit.n_qubits)
    return StateVector(circuit.n_qubits, amps)


def prob_one(state: StateVector, qubit: int) -> float:
    """Probability of measuring |1> on one qubit (others traced out)."""
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    psi = state.amplitudes.reshape((2,) * state.n_qubits)
    branch = np.take(psi, 1, axis=qubit)
    return float(np.sum(np.abs(branch) ** 2))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("inner product needs equal qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on n qubits."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        dim = 2**self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=HERMITIAN_ATOL, rtol=0.0):
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL * dim:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        evals = np.linalg.eigvalsh(m)
        if float(evals.min()) < EIGENVALUE_FLOOR * dim:
            raise ValueError(
                f"density matrix has negative eigenvalue {float(evals.min())!r}"
            )

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        amps = state.amplitudes
        return cls(state.n_qubits, np.outer(amps, amps.conj()))


def partial_trace(
    state: StateVector | DensityMatrix, keep: Iterable[int]
) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (remaining qubits traced out).

    Kept qubits appear in ascending original order; keeping every qubit of
    a pure state returns its outer product.
    """
    keep_sorted = sorted(set(int(q) for q in keep))
    if isinstance(state, StateVector):
        n = state.n_qubits
    elif isinstance(state, DensityMatrix):
        n = state.n_qubits
    else:
        raise TypeError(f"expected StateVector or DensityMatrix, got {type(state)!r}")
    if not keep_sorted:
        raise ValueError("must keep at least one qubit")
    if keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise ValueError(f"keep set {keep_sorted} out of range for {n} qubits")
    k = len(keep_sorted)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape((2,) * n)
        drop = [q for q in range(n) if q not in keep_sorted]
        rho = np.tensordot(psi, psi.conj(), axes=(drop, drop))
        return DensityMatrix(k, rho.reshape(2**k, 2**k))
    rho = state.matrix
    n_cur = n
    kept = list(range(n))
    for q in sorted(set(range(n)) - set(keep_sorted), reverse=True):
        pos = kept.index(q)
        t = rho.reshape((2,) * (2 * n_cur))
        t = np.trace(t, axis1=pos, axis2=n_cur + pos)
        n_cur -= 1
        rho = t.reshape(2**n_cur, 2**n_cur)
        kept.pop(pos)
    return DensityMatrix(k, rho)


def density_from_ensemble(
    states: Sequence[StateVector] | np.ndarray, probs: Sequence[float]
) -> DensityMatrix:
    """Mixture sum_i p_i |x_i><x_i| of pure states with weights p_i."""
    if isinstance(states, np.ndarray):
        mat = np.asarray(states, dtype=complex)
        if mat.ndim != 2:
            raise ValueError("expected a (count, dim) array of amplitudes")
        n = int(round(math.log2(mat.shape[1])))
        if 2**n != mat.shape[1]:
            raise ValueError("state dimension is not a power of two")
    else:
        states = list(states)
        if not states:
            raise ValueError("ensemble must contain at least one state")
        n = states[0].n_qubits
        if any(s.n_qubits != n for s in states):
            raise ValueError("ensemble states must share one qubit count")
        mat = np.stack([s.amplitudes for s in states])
    p = np.asarray(probs, dtype=float)
    if p.shape != (mat.shape[0],):
        raise ValueError("need one probability per state")
    if float(p.min(initial=0.0)) < 0.0:
        raise ValueError("ensemble probabilities must be nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError(f"ensemble probabilities sum to {float(p.sum())!r}, not 1")
    rho = np.einsum("i,ia,ib->ab", p, mat, mat.conj())
    return DensityMatrix(n, rho)


def eigh(rho: DensityMatrix) -> tuple[np.ndarray, list[StateVector]]:
    """Eigenvalues (descending) and eigenstates of a density matrix."""
    vals, vecs = np.linalg.eigh(rho.matrix)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    states = [StateVector(rho.n_qubits, vecs[:, j]) for j in order]
    return vals, states


@dataclass(frozen=True)
class ProductState:
    """Unentangled n-qubit state stored as one unit 2-vector per qubit.

    Scales to hundreds of qubits where a dense statevector cannot; only
    single-qubit gates may be applied.
    """

    n_qubits: int
    factors: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.factors, dtype=complex)
        object.__setattr__(self, "factors", f)
        if f.shape != (self.n_qubits, 2):
            raise ValueError(f"expected factor shape {(self.n_qubits, 2)}, got {f.shape}")
        norms = np.sum(np.abs(f) ** 2, axis=1)
        if float(np.max(np.abs(norms - 1.0))) > NORM_ATOL:
            raise ValueError("every qubit factor must be normalized")

    @classmethod
    def zero(cls, n_qubits: int) -> "ProductState":
        f = np.zeros((n_qubits, 2), dtype=complex)
        f[:, 0] = 1.0
        return cls(n_qubits, f)

    def prob_one(self, qubit: int) -> float:
        return float(np.abs(self.factors[qubit, 1]) ** 2)

    def to_statevector(self) -> StateVector:
        amps = np.array([1.0], dtype=complex)
        for q in range(self.n_qubits):
            amps = np.kron(amps, self.factors[q])
        return StateVector(self.n_qubits, amps)


def product_apply(
    state: ProductState, gate: Gate, angle: float | None = None
) -> ProductState:
    """Apply a single-qubit gate to one factor; entangling kinds are errors."""
    if GATE_ARITY[gate.kind] != 1:
        raise ValueError(
            f"entangling gate {gate.kind} cannot act on a ProductState"
        )
    (q,) = gate.wires
    if q >= state.n_qubits:
        raise ValueError(f"wire {q} out of range for {state.n_qubits} qubits")
    a = gate.angle if angle is None else float(angle)
    u = gate_unitary(gate.kind, a)
    f = state.factors.copy()
    f[q] = u @ f[q]
    return ProductState(state.n_qubits, f)
