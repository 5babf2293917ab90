"""Distinguishability and fidelity bounds between data and generator states.

All quantities reduce to Hermitian eigendecompositions or singular values:
the trace norm is a sum of absolute eigenvalues, matrix square roots clip
tiny negative eigenvalues at zero, and the best pure generator for a mixed
target is the target's leading eigenvector.  Inputs may be square arrays of any
dimension; :class:`~qganlab.qcore.DensityMatrix` and
:class:`~qganlab.qcore.StateVector` instances are accepted wherever a state
makes sense.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    EIGENVALUE_FLOOR,
    HERMITIAN_ATOL,
    NORM_ATOL,
    TRACE_ATOL,
    DensityMatrix,
    StateVector,
)

INEQUALITY_SLACK = 1e-9


def _as_density(state, name: str = "state") -> np.ndarray:
    """Normalize to a validated density matrix array of any dimension."""
    if isinstance(state, StateVector):
        amps = state.amplitudes
        return np.outer(amps, amps.conj())
    if isinstance(state, DensityMatrix):
        return state.matrix
    m = np.asarray(state, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.conj().T, atol=HERMITIAN_ATOL, rtol=0.0):
        raise ValueError(f"{name} is not Hermitian")
    dim = m.shape[0]
    if abs(complex(np.trace(m)) - 1.0) > TRACE_ATOL * dim:
        raise ValueError(f"{name} trace is {complex(np.trace(m))!r}, expected 1")
    if float(np.linalg.eigvalsh(m).min()) < EIGENVALUE_FLOOR * dim:
        raise ValueError(f"{name} has a negative eigenvalue")
    return m


def _as_pure(gamma, name: str = "gamma") -> np.ndarray:
    if isinstance(gamma, StateVector):
        return gamma.amplitudes
    g = np.asarray(gamma, dtype=complex)
    if g.ndim != 1:
        raise ValueError(f"{name} must be a state vector, got shape {g.shape}")
    if abs(np.linalg.norm(g) - 1.0) > NORM_ATOL * len(g):
        raise ValueError(f"{name} is not normalized")
    return g


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    r = _as_density(rho, "rho")
    s = _as_density(sigma, "sigma")
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    return r, s


def _trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def _psd_eigenvalues(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with sub-noise eigenvalues zeroed.

    Square roots amplify eigenvalue noise (sqrt(1e-16) = 1e-8), so anything
    below a few units of machine epsilon relative to the largest eigenvalue
    is treated as an exact zero; plain clipping at 0 would leak that noise
    into fidelities at the 1e-8 level.
    """
    evals, evecs = np.linalg.eigh(m)
    tol = 4.0 * m.shape[0] * np.finfo(float).eps * float(np.abs(evals).max(initial=0.0))
    return np.where(evals > tol, evals, 0.0), evecs


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    evals, evecs = _psd_eigenvalues(m)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma; 0 for equal, 1 for orthogonal."""
    r, s = _pair(rho, sigma)
    return 0.5 * _trace_norm(r - s)


def uhlmann_fidelity(rho, sigma) -> float:
    """Trace norm of sqrt(rho) sqrt(sigma); |<a|b>| for two pure states.

    Equals Tr sqrt(sqrt(rho) sigma sqrt(rho)), but summing singular values
    of the product avoids square-rooting eigenvalues of the sandwiched
    matrix, whose small entries carry squared (hence sqrt-amplified) noise.
    """
    r, s = _pair(rho, sigma)
    sing = np.linalg.svd(_psd_sqrt(r) @ _psd_sqrt(s), compute_uv=False)
    return float(np.sum(sing))


def overlap_fidelity(gamma, rho) -> float:
    """<gamma|rho|gamma>: the swap-test fidelity of a pure probe state."""
    g = _as_pure(gamma)
    r = _as_density(rho, "rho")
    if r.shape[0] != len(g):
        raise ValueError(f"dimension mismatch: {len(g)} vs {r.shape}")
    value = float(np.real(np.vdot(g, r @ g)))
    return min(max(value, 0.0), 1.0)


def fvg_check(rho, sigma) -> tuple[float, float]:
    """Margins of the fidelity sandwich 1 - F <= T <= sqrt(1 - F^2).

    Returns (T - (1 - F), sqrt(1 - F^2) - T); both are >= 0 up to numerical
    slack for any valid pair.
    """
    t = trace_distance(rho, sigma)
    f = uhlmann_fidelity(rho, sigma)
    upper = math.sqrt(max(1.0 - f * f, 0.0))
    return t - (1.0 - f), upper - t


def helstrom_success(rho, sigma, prior: float = 0.5) -> float:
    """Best single-measurement success probability telling rho from sigma.

    1/2 + 1/2 ||prior rho - (1 - prior) sigma||_1: reaches 1/2 for equal
    states at even prior and 1 for orthogonal ones.
    """
    if not 0.0 <= prior <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {prior}")
    r, s = _pair(rho, sigma)
    return 0.5 + 0.5 * _trace_norm(prior * r - (1.0 - prior) * s)


def nash_value(rho_data, rho_g) -> float:
    """Adversarial value log(1/2 + t) + log(1/2 - t), t = trace_distance / 2.

    Equal states give exactly -2 log 2; t >= 1/2 (orthogonal states) makes
    the second log diverge and is reported as -inf.
    """
    t = 0.5 * trace_distance(rho_data, rho_g)
    low = 0.5 - t
    if low <= 0.0:
        return float("-inf")
    return math.log(0.5 + t) + math.log(low)


def best_pure_generator(rho_data) -> tuple[float, StateVector]:
    """Top eigenpair of the data state: the fidelity ceiling and its witness.

    No pure state has overlap fidelity above lambda_max, and the leading
    eigenvector attains it.  The dimension must be a power of two so the
    witness can be returned as a StateVector.
    """
    r = _as_density(rho_data, "rho_data")
    dim = r.shape[0]
    n_qubits = dim.bit_length() - 1
    if 2**n_qubits != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    evals, evecs = np.linalg.eigh(r)
    top = int(np.argmax(evals))
    return float(evals[top]), StateVector(n_qubits, evecs[:, top])


def best_data_state(rho_data, xs) -> tuple[int, float]:
    """Index and value of argmax_i <x_i|rho|x_i>; ties go to the lowest index."""
    xs = list(xs)
    if not xs:
        raise ValueError("need at least one data state")
    fidelities = np.array([overlap_fidelity(x, rho_data) for x in xs])
    idx = int(np.argmax(fidelities))
    return idx, float(fidelities[idx])


def discriminator_lower_bound(rho_data, gamma) -> tuple[float, bool]:
    """Success floor 1 - F/2 forced on the optimal discriminator by a pure generator.

    Returns the bound and whether the Helstrom success probability at even
    prior actually clears it (it always should, up to numerical slack).
    """
    f = overlap_fidelity(gamma, rho_data)
    bound = 1.0 - 0.5 * f
    g = _as_pure(gamma)
    success = helstrom_success(rho_data, np.outer(g, g.conj()))
    return bound, bool(success >= bound - INEQUALITY_SLACK)


@dataclass
class BoundReport:
    """Every scalar bound for one (data state, generator) pair.

    ``overlap_fidelity`` is None when the generator is mixed; all other
    fields are always present.
    """

    trace_distance: float
    uhlmann_fidelity: float
    overlap_fidelity: float | None
    helstrom_success: float
    fvg_lower_margin: float
    fvg_upper_margin: float
    lambda_max: float
    p_data_max: float
    lower_bound_value: float
    nash_value: float

    FIELDS = (
        "trace_distance",
        "uhlmann_fidelity",
        "overlap_fidelity",
        "helstrom_success",
        "fvg_lower_margin",
        "fvg_upper_margin",
        "lambda_max",
        "p_data_max",
        "lower_bound_value",
        "nash_value",
    )

    def to_json(self) -> dict:
        doc = {}
        for name in self.FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            doc[name] = float(value)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "BoundReport":
        kwargs = {name: doc.get(name) for name in cls.FIELDS}
        missing = [k for k, v in kwargs.items() if v is None and k != "overlap_fidelity"]
        if missing:
            raise ValueError(f"bound report missing fields: {missing}")
        return cls(**kwargs)

    def format_table(self) -> str:
        width = max(len(name) for name in self.FIELDS)
        lines = []
        for name in self.FIELDS:
            value = getattr(self, name)
            shown = "n/a (mixed generator)" if value is None else f"{value:.12f}"
            lines.append(f"{name.ljust(width)}  {shown}")
        return "\n".join(lines)

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BoundReport":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json(json.load(fh))


def bound_report(rho_data, generator, data_states) -> BoundReport:
    """Assemble the full report for a data density matrix and a generator.

    ``generator`` may be a pure state (vector) or a density matrix;
    ``data_states`` are the encoded samples defining p_data_max.
    """
    r = _as_density(rho_data, "rho_data")
    pure_gamma = None
    if isinstance(generator, StateVector):
        pure_gamma = generator.amplitudes
    else:
        g = np.asarray(generator, dtype=complex)
        if g.ndim == 1:
            pure_gamma = _as_pure(g, "generator")
    if pure_gamma is not None:
        rho_g = np.outer(pure_gamma, pure_gamma.conj())
        overlap = overlap_fidelity(pure_gamma, r)
    else:
        rho_g = _as_density(generator, "generator")
        overlap = None
    lower_margin, upper_margin = fvg_check(r, rho_g)
    lam = float(np.linalg.eigvalsh(r).max())
    _, p_max = best_data_state(r, data_states)
    return BoundReport(
        trace_distance=trace_distance(r, rho_g),
        uhlmann_fidelity=uhlmann_fidelity(r, rho_g),
        overlap_fidelity=overlap,
        helstrom_success=helstrom_success(r, rho_g),
        fvg_lower_margin=lower_margin,
        fvg_upper_margin=upper_margin,
        lambda_max=lam,
        p_data_max=p_max,
        lower_bound_value=1.0 - 0.5 * p_max,
        nash_value=nash_value(r, rho_g),
    )
