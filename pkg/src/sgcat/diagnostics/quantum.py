"""
Fidelity kernel of a second-order Pauli-Z evolution feature map,
evaluated by exact statevector simulation.

The prepared state is |Phi(x)> = [U(x) H^n]^d |0...0> with

    U(x) = exp(i sum_{(j,k)} phi_jk(x) Z_j Z_k) exp(i sum_j phi_j(x) Z_j)
    phi_j(x) = x_j,   phi_jk(x) = (pi - x_j)(pi - x_k)

Every generator is diagonal in the computational basis, so U(x) is a phase
vector: basis state b picks up exp(i [sum_j phi_j s_j + sum_jk phi_jk s_j s_k])
with s_j = 1 - 2 b_j. Qubit j is bit j of the basis index (little endian).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantumFeatureMap:
    n_qubits: int = 3
    depth: int = 2
    entanglement: tuple[tuple[int, int], ...] = ((0, 1), (1, 2))

    def __post_init__(self):
        if self.n_qubits < 1 or self.depth < 1:
            raise ValueError("n_qubits and depth must be positive")
        for j, k in self.entanglement:
            if not (0 <= j < self.n_qubits and 0 <= k < self.n_qubits and j != k):
                raise ValueError(f"invalid entangling pair {(j, k)}")

    @classmethod
    def linear(cls, n_qubits: int = 3, depth: int = 2) -> "QuantumFeatureMap":
        return cls(n_qubits, depth, tuple((j, j + 1) for j in range(n_qubits - 1)))

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "depth": self.depth,
                "entanglement": [list(p) for p in self.entanglement]}

    @classmethod
    def from_dict(cls, d: dict) -> "QuantumFeatureMap":
        return cls(int(d["n_qubits"]), int(d["depth"]), tuple(tuple(p) for p in d["entanglement"]))

    def signs(self) -> np.ndarray:
        """(2**n, n) array of s_j(b) = 1 - 2 b_j."""
        idx = np.arange(2 ** self.n_qubits)
        bits = (idx[:, None] >> np.arange(self.n_qubits)[None, :]) & 1
        return 1.0 - 2.0 * bits

    def hadamard_all(self) -> np.ndarray:
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        out = np.array([[1.0]])
        for _ in range(self.n_qubits):
            out = np.kron(out, h)
        return out


def _check_range(X: np.ndarray) -> None:
    if np.any(X < 0.0) or np.any(X > math.pi):
        raise ValueError("quantum features must be scaled into [0, pi]")


def phase_angles(X, fmap: QuantumFeatureMap) -> np.ndarray:
    """Diagonal phase of U(x) for each basis state; shape (N, 2**n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != fmap.n_qubits:
        raise ValueError(f"expected {fmap.n_qubits} features, got {X.shape[1]}")
    s = fmap.signs()
    theta = X @ s.T
    for j, k in fmap.entanglement:
        theta += ((math.pi - X[:, j]) * (math.pi - X[:, k]))[:, None] * (s[:, j] * s[:, k])[None, :]
    return theta


def quantum_states(X, fmap: QuantumFeatureMap = QuantumFeatureMap()) -> np.ndarray:
    """Statevectors for each row of X; shape (N, 2**n), complex."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_range(X)
    phases = np.exp(1j * phase_angles(X, fmap))
    Hn = fmap.hadamard_all()
    dim = 2 ** fmap.n_qubits
    psi = np.zeros((X.shape[0], dim), dtype=complex)
    psi[:, 0] = 1.0
    for _ in range(fmap.depth):
        psi = (psi @ Hn.T) * phases
    return psi


def quantum_state(x, fmap: QuantumFeatureMap = QuantumFeatureMap()) -> np.ndarray:
    return quantum_states(np.asarray(x, dtype=float)[None, :], fmap)[0]


def quantum_kernel(x, x2, fmap: QuantumFeatureMap = QuantumFeatureMap()) -> float:
    """State fidelity |<Phi(x2)|Phi(x)>|^2."""
    a = quantum_state(x, fmap)
    b = quantum_state(x2, fmap)
    return float(abs(np.vdot(b, a)) ** 2)


def quantum_gram(X, Y=None, fmap: QuantumFeatureMap = QuantumFeatureMap()) -> np.ndarray:
    SX = quantum_states(X, fmap)
    SY = SX if Y is None else quantum_states(Y, fmap)
    K = np.abs(SX @ SY.conj().T) ** 2
    if Y is None:
        K = 0.5 * (K + K.T)
    return K
