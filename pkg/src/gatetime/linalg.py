"""Dense complex-matrix kernel: exponentials, norms, commutators and gate-error
metrics shared by every other module.

All matrices are plain ``numpy`` arrays of ``complex128``. Hamiltonians are
Hermitian with entries in units of the smallest coupling strength (hbar = 1),
so evolution times come out in units of inverse energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Centralized tolerances.
ATOL_ALGEBRAIC = 1e-12  # entrywise algebra (Hermiticity, phase removal)
ATOL_UNITARY = 1e-10    # ||U^dag U - 1||_HS for accepted unitaries
ATOL_COMPOSED = 1e-9    # composed evolutions / simulated schedules


class MatrixShapeError(ValueError):
    """Operands with incompatible or non-square shapes."""


class NotHermitianError(ValueError):
    """A matrix required to be Hermitian fails the tolerance check."""


class NotUnitaryError(ValueError):
    """A matrix required to be unitary fails the tolerance check."""


def as_square_array(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise MatrixShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a: np.ndarray, tol: float = ATOL_ALGEBRAIC) -> bool:
    a = as_square_array(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_unitary(u: np.ndarray, tol: float = ATOL_UNITARY) -> bool:
    u = as_square_array(u)
    d = u.shape[0]
    return hs_norm(u.conj().T @ u - np.eye(d)) <= tol


def require_hermitian(a, tol: float = ATOL_ALGEBRAIC) -> np.ndarray:
    a = as_square_array(a)
    dev = float(np.max(np.abs(a - a.conj().T)))
    if dev > tol:
        raise NotHermitianError(
            f"matrix is not Hermitian: max |A - A^dag| = {dev:.3e} > {tol:.1e}"
        )
    return a


def require_unitary(u, tol: float = ATOL_UNITARY) -> np.ndarray:
    u = as_square_array(u)
    d = u.shape[0]
    dev = hs_norm(u.conj().T @ u - np.eye(d))
    if dev > tol:
        raise NotUnitaryError(
            f"matrix is not unitary: ||U^dag U - 1||_HS = {dev:.3e} > {tol:.1e}"
        )
    return u


def mat_exp(a: np.ndarray, scale: float) -> np.ndarray:
    """exp(-i * scale * A) for Hermitian A, via eigendecomposition.

    Exact up to machine precision for Hermitian input, so the result is
    unitary to ~1e-15 regardless of scale.
    """
    a = require_hermitian(a)
    if scale == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    evals, evecs = np.linalg.eigh(a)
    phases = np.exp(-1j * scale * evals)
    return (evecs * phases) @ evecs.conj().T


def hs_norm(a) -> float:
    """Hilbert-Schmidt norm sqrt(Tr(A^dag A))."""
    return float(np.linalg.norm(np.asarray(a)))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = as_square_array(a)
    b = as_square_array(b)
    if a.shape != b.shape:
        raise MatrixShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def gate_error(u: np.ndarray, v: np.ndarray) -> float:
    """Phase-insensitive infidelity 1 - |Tr(U^dag V)|^2 / d^2.

    Zero iff U = e^{i phi} V; symmetric in its arguments.
    """
    u = as_square_array(u)
    v = as_square_array(v)
    if u.shape != v.shape:
        raise MatrixShapeError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    overlap = abs(np.trace(u.conj().T @ v)) ** 2 / d**2
    return max(0.0, 1.0 - overlap)


def edge_operator(dim: int, n: int, m: int) -> np.ndarray:
    """|n><m| + |m><n| on levels n, m (1-based labels)."""
    if not (1 <= n <= dim and 1 <= m <= dim and n != m):
        raise MatrixShapeError(f"invalid levels ({n},{m}) for dim {dim}")
    b = np.zeros((dim, dim), dtype=complex)
    b[n - 1, m - 1] = 1.0
    b[m - 1, n - 1] = 1.0
    return b


def two_level_rotation(dim: int, n: int, m: int, angle: float) -> np.ndarray:
    """exp(-i * angle * (|n><m| + |m><n|)): rotation inside span{|n>,|m>}."""
    u = np.eye(dim, dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    i, j = n - 1, m - 1
    u[i, i] = c
    u[j, j] = c
    u[i, j] = -1j * s
    u[j, i] = -1j * s
    return u


@dataclass(frozen=True)
class DiagonalPhases:
    """Angles theta_1..theta_d defining V = diag(e^{i theta_1}, ..., e^{i theta_d})."""

    thetas: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.thetas)

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.thetas))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def is_trivial(self, tol: float = ATOL_ALGEBRAIC) -> bool:
        return bool(np.max(np.abs(np.exp(1j * np.asarray(self.thetas)) - 1.0)) <= tol)

    @staticmethod
    def zero(dim: int) -> "DiagonalPhases":
        return DiagonalPhases(thetas=(0.0,) * dim)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian Hermitian matrix: real N(0,1) diagonal, standard complex
    Gaussian off-diagonals (Hermitized)."""
    re = rng.normal(size=(dim, dim))
    im = rng.normal(size=(dim, dim))
    upper = np.triu(re + 1j * im, k=1) / np.sqrt(2)
    return np.diag(rng.normal(size=dim)) + upper + upper.conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))
