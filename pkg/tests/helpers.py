"""Independent brute-force oracles shared by the test modules.

Everything here deliberately avoids the package's own fast paths: gates are
embedded into full unitaries by explicit bit arithmetic, exponentials come
from truncated power series, and reduced density matrices from triple loops.
"""

import numpy as np

import qganlab.qcore as qc


def embed_unitary(u, wires, n_qubits):
    """Full 2^n x 2^n matrix of gate ``u`` on ``wires`` (qubit 0 = MSB)."""
    dim = 2**n_qubits
    k = len(wires)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        sub_in = 0
        for w in wires:
            sub_in = (sub_in << 1) | bits[w]
        for sub_out in range(2**k):
            amp = u[sub_out, sub_in]
            if amp == 0.0:
                continue
            out_bits = list(bits)
            for pos, w in enumerate(wires):
                out_bits[w] = (sub_out >> (k - 1 - pos)) & 1
            row = 0
            for b in out_bits:
                row = (row << 1) | b
            full[row, col] += amp
    return full


def expm_series(m, terms=48):
    """Matrix exponential by truncated power series."""
    out = np.eye(m.shape[0], dtype=complex)
    acc = np.eye(m.shape[0], dtype=complex)
    for j in range(1, terms):
        acc = acc @ m / j
        out = out + acc
    return out


def circuit_unitary(circuit, params, gate_shifts=None):
    """Dense unitary of a whole circuit by multiplying embedded gates."""
    dim = 2**circuit.n_qubits
    u = np.eye(dim, dtype=complex)
    for i, gate in enumerate(circuit.gates):
        shift = 0.0 if gate_shifts is None else float(gate_shifts[i])
        angle = qc.resolve_angle(gate, np.asarray(params, dtype=float), shift)
        u = embed_unitary(qc.gate_unitary(gate.kind, angle), gate.wires, circuit.n_qubits) @ u
    return u


def partial_trace_oracle(amplitudes, n_qubits, keep):
    """Reduced density matrix of a pure state by explicit index loops."""
    keep = sorted(keep)
    drop = [q for q in range(n_qubits) if q not in keep]
    dk, dd = 2 ** len(keep), 2 ** len(drop)

    def full_index(keep_bits, drop_bits):
        bits = [0] * n_qubits
        for pos, q in enumerate(keep):
            bits[q] = keep_bits[pos]
        for pos, q in enumerate(drop):
            bits[q] = drop_bits[pos]
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        return idx

    def to_bits(value, width):
        return [(value >> (width - 1 - p)) & 1 for p in range(width)]

    rho = np.zeros((dk, dk), dtype=complex)
    for i in range(dk):
        ib = to_bits(i, len(keep))
        for j in range(dk):
            jb = to_bits(j, len(keep))
            for a in range(dd):
                ab = to_bits(a, len(drop))
                rho[i, j] += amplitudes[full_index(ib, ab)] * np.conj(
                    amplitudes[full_index(jb, ab)]
                )
    return rho


def random_state(dim, rng):
    """Haar-ish random unit vector from complex Gaussian entries."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim, rng, rank=None):
    """Random density matrix rho = G G^dag / tr from a Ginibre block."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_circuit(n_qubits, rng, n_gates=12):
    """Random circuit over the full gate set, one parameter per slot."""
    gates = []
    n_params = 0
    kinds = ["RY", "RYY", "H", "X", "CNOT", "CRY"]
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "RY":
            q = int(rng.integers(n_qubits))
            gates.append(qc.Gate("RY", (q,), qc.ParamRef(n_params)))
            n_params += 1
        elif kind == "RYY":
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(qc.Gate("RYY", (int(a), int(b)), qc.ParamRef(n_params)))
            n_params += 1
        elif kind == "CRY":
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.extend(qc.cry_gates(int(a), int(b), param=n_params))
            n_params += 1
        elif kind == "CNOT":
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(qc.Gate("CNOT", (int(a), int(b))))
        else:
            q = int(rng.integers(n_qubits))
            gates.append(qc.Gate(kind, (q,)))
    return qc.Circuit(n_qubits, tuple(gates), n_params)
