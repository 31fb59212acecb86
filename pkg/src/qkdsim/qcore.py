"""Exact quantum mechanics for small qubit registers.

Dense state vectors, operators, Kraus/unitary application, projective
measurement and density matrices, all in complex128 and limited to
MAX_QUBITS qubits (the largest register any block in this project needs).

Index convention, fixed project-wide: qubit 0 is the MOST significant bit
of the basis-state index.  Equivalently, ``amps.reshape((2,) * n)`` puts
qubit q on axis q.  Every module builds on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

MAX_QUBITS = 5

# Tolerance for algebraic identities (unitarity, completeness, norms).
EPS_ALG = 1e-9
# Norms below this are treated as exact annihilation (heralded loss).
EPS_ZERO = 1e-12
# Tolerance for scalar amplitude comparisons.
EPS_CPLX = 1e-12

# Complex amplitudes are plain complex128 scalars; ceq() is the shared
# tolerant equality.
Cplx = complex


def ceq(a: complex, b: complex, tol: float = EPS_CPLX) -> bool:
    """Tolerant equality for complex amplitudes."""
    return abs(a - b) <= tol


class MeasBasis(Enum):
    Z = "Z"  # {|0>, |1>}
    X = "X"  # {|+>, |->}


_PROJECTORS = {
    MeasBasis.Z: (
        np.array([[1, 0], [0, 0]], dtype=complex),
        np.array([[0, 0], [0, 1]], dtype=complex),
    ),
    MeasBasis.X: (
        np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
        np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex),
    ),
}


@dataclass(frozen=True, eq=False)
class Ket:
    """State vector of an n-qubit register; may be unnormalized mid-pipeline."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"register size {self.n_qubits} outside 1..{MAX_QUBITS}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"amplitude vector must have length {1 << self.n_qubits}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = EPS_ALG) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "Ket":
        n = self.norm()
        if n < EPS_ZERO:
            raise ValueError("cannot normalize an annihilated state")
        return Ket(self.n_qubits, self.amps / n)


def overlap(a: Ket, b: Ket) -> complex:
    """Inner product <a|b>."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("overlap of registers of different size")
    return complex(np.vdot(a.amps, b.amps))


def same_up_to_phase(a: Ket, b: Ket, tol: float = EPS_ALG) -> bool:
    """True when normalized a and b differ only by a global phase."""
    return abs(abs(overlap(a.normalized(), b.normalized())) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class Op:
    """Square operator on one or more qubits (dim a power of two)."""

    dim: int
    mat: np.ndarray
    unitary: bool = False

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {self.dim}")
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ValueError("operator dimension must be a power of two")
        if not np.all(np.isfinite(mat)):
            raise ValueError("non-finite operator entry")
        if self.unitary:
            err = np.max(np.abs(mat @ mat.conj().T - np.eye(self.dim)))
            if err > EPS_ALG:
                raise ValueError(f"operator tagged unitary fails U U+ = I by {err:.2e}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def tensor(self, other: "Op") -> "Op":
        return Op(self.dim * other.dim, np.kron(self.mat, other.mat),
                  unitary=self.unitary and other.unitary)

    def dagger(self) -> "Op":
        return Op(self.dim, self.mat.conj().T, unitary=self.unitary)


# Single-qubit operators used throughout: identity, phase flip, bit flip,
# and their product ZX = [[0, 1], [-1, 0]].
OP_I = Op(2, np.eye(2), unitary=True)
OP_Z = Op(2, np.array([[1, 0], [0, -1]]), unitary=True)
OP_X = Op(2, np.array([[0, 1], [1, 0]]), unitary=True)
OP_ZX = Op(2, np.array([[0, 1], [-1, 0]]), unitary=True)
OP_H = Op(2, np.array([[1, 1], [1, -1]]) / np.sqrt(2.0), unitary=True)

_STATE_TABLE = {
    "ket0": [1, 0],
    "ket1": [0, 1],
    "plus": [2 ** -0.5, 2 ** -0.5],
    "minus": [2 ** -0.5, -(2 ** -0.5)],
    "phi": [2 ** -0.5, 0, 0, 2 ** -0.5],
    "psi": [0, 2 ** -0.5, 2 ** -0.5, 0],
    "psi_prime": [0, 2 ** -0.5, -(2 ** -0.5), 0],
}


def make_state(name: str, p: float | None = None) -> Ket:
    """Build one of the canonical source states.

    Known names: ket0, ket1, plus, minus (one qubit); phi = (|00>+|11>)/sqrt2,
    psi = (|01>+|10>)/sqrt2, psi_prime = (|01>-|10>)/sqrt2, and the damped pair
    phi_p = (sqrt(1-p)|00> + |11>)/sqrt(2-p) which requires p in [0, 1).
    """
    if name == "phi_p":
        if p is None:
            raise ValueError("phi_p requires the damping probability p")
        if not 0.0 <= p < 1.0:
            raise ValueError(f"phi_p requires p in [0, 1), got {p}")
        amps = np.array([np.sqrt(1.0 - p), 0.0, 0.0, 1.0], dtype=complex)
        return Ket(2, amps / np.sqrt(2.0 - p))
    if name not in _STATE_TABLE:
        raise ValueError(f"unknown state name {name!r}")
    if p is not None:
        raise ValueError(f"state {name!r} takes no parameter")
    amps = np.array(_STATE_TABLE[name], dtype=complex)
    return Ket(1 if len(amps) == 2 else 2, amps)


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product a (x) b; a's qubits become the more significant ones."""
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"tensor product has {n} qubits, limit is {MAX_QUBITS}")
    return Ket(n, np.kron(a.amps, b.amps))


def apply_on(op: Op, targets: list[int] | tuple[int, ...], state: Ket) -> Ket:
    """Apply op to the listed qubits (first target = most significant in op).

    The result may be unnormalized (Kraus branches); callers renormalize
    where their contract requires it.
    """
    n = state.n_qubits
    k = len(targets)
    if op.dim != 1 << k:
        raise ValueError(f"operator dim {op.dim} does not match {k} target(s)")
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets {targets}")
    for q in targets:
        if not 0 <= q < n:
            raise ValueError(f"target {q} outside register of {n} qubits")
    if k == 1:
        q = targets[0]
        a = state.amps.reshape(1 << q, 2, -1)
        m = op.mat
        out = np.empty_like(a)
        out[:, 0, :] = m[0, 0] * a[:, 0, :] + m[0, 1] * a[:, 1, :]
        out[:, 1, :] = m[1, 0] * a[:, 0, :] + m[1, 1] * a[:, 1, :]
        return Ket(n, out.reshape(-1))
    psi = state.amps.reshape((2,) * n)
    psi = np.moveaxis(psi, targets, range(k))
    psi = (op.mat @ psi.reshape(op.dim, -1)).reshape((2,) * n)
    psi = np.moveaxis(psi, range(k), targets)
    return Ket(n, psi.reshape(-1))


def measurement_probs(state: Ket, qubit: int, basis: MeasBasis) -> tuple[float, float]:
    """Exact Born probabilities (p0, p1) for measuring one qubit; no sampling."""
    p0_op, p1_op = _PROJECTORS[basis]
    v0 = apply_on(Op(2, p0_op), [qubit], state)
    v1 = apply_on(Op(2, p1_op), [qubit], state)
    return float(np.vdot(v0.amps, v0.amps).real), float(np.vdot(v1.amps, v1.amps).real)


def measure_qubit(state: Ket, qubit: int, basis: MeasBasis,
                  rng: np.random.Generator) -> tuple[int, Ket]:
    """Projective measurement of one qubit; returns (outcome, collapsed state).

    Outcome encoding: Z basis |0>->0, |1>->1; X basis |+>->0, |->->1.
    The input must be normalized; the collapsed state is renormalized.
    """
    if not state.is_normalized():
        raise ValueError("measurement requires a normalized state")
    p0_op, p1_op = _PROJECTORS[basis]
    v0 = apply_on(Op(2, p0_op), [qubit], state)
    p0 = float(np.vdot(v0.amps, v0.amps).real)
    if rng.random() < p0:
        return 0, Ket(state.n_qubits, v0.amps / np.sqrt(p0))
    v1 = apply_on(Op(2, p1_op), [qubit], state)
    n1 = float(np.linalg.norm(v1.amps))
    return 1, Ket(state.n_qubits, v1.amps / n1)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense density matrix; Hermiticity is enforced, trace may be < 1
    mid-computation (conditioned branches)."""

    dim: int
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {self.dim}")
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ValueError("density dimension must be a power of two")
        if np.max(np.abs(mat - mat.conj().T)) > EPS_ALG:
            raise ValueError("density matrix must be Hermitian")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])


def to_density(state: Ket) -> DensityMatrix:
    return DensityMatrix(1 << state.n_qubits, np.outer(state.amps, state.amps.conj()))


def expand_op(op: Op, targets: list[int] | tuple[int, ...], n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n matrix acting as op on targets and identity elsewhere."""
    dim = 1 << n_qubits
    full = np.empty((dim, dim), dtype=complex)
    basis = np.zeros(dim, dtype=complex)
    for j in range(dim):
        basis[j] = 1.0
        full[:, j] = apply_on(op, targets, Ket(n_qubits, basis)).amps
        basis[j] = 0.0
    return full


def kraus_complete(kraus_set: list[Op], tol: float = EPS_ALG) -> bool:
    """Check sum E+ E = I for a Kraus set (all operators of equal dim)."""
    dim = kraus_set[0].dim
    acc = np.zeros((dim, dim), dtype=complex)
    for e in kraus_set:
        if e.dim != dim:
            return False
        acc += e.mat.conj().T @ e.mat
    return bool(np.max(np.abs(acc - np.eye(dim))) <= tol)


def evolve_density(rho: DensityMatrix, kraus_set: list[Op],
                   targets: list[int] | tuple[int, ...]) -> DensityMatrix:
    """Apply the channel rho -> sum_k E_k rho E_k+ on the target qubits.

    The Kraus set must be complete (trace preserving); per-label conditioning
    with incomplete sets is the caller's business, not this function's.
    """
    if not kraus_complete(kraus_set):
        raise ValueError("incomplete Kraus set (sum E+E differs from identity)")
    n = rho.dim.bit_length() - 1
    out = np.zeros_like(rho.mat)
    for e in kraus_set:
        full = expand_op(e, targets, n)
        out += full @ rho.mat @ full.conj().T
    return DensityMatrix(rho.dim, out)
