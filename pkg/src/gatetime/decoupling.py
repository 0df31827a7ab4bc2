"""Averaging maps built from diagonal unitaries, vertex removal, edge
isolation and finite-n Trotter sequences.

Conjugating the drift by a rapid cycle over a finite unitary set V averages
the generator to M(H) = (1/|V|) sum_v v^dag H v. With V = {1, 1 - 2P_j} the
average deletes row and column j of a zero-diagonal H, i.e. removes vertex j
from the coupling graph at no time cost (the pulses are free). Composing
such maps isolates a single edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import HamiltonianGraph
from .linalg import (
    ATOL_ALGEBRAIC,
    DiagonalPhases,
    mat_exp,
    require_hermitian,
)


@dataclass(frozen=True)
class AveragingMap:
    """Finite list of diagonal unitaries, stored as their diagonals.

    Every element must be diagonal with unit-modulus entries (each is
    generated by the diagonal controls). Duplicates are kept: the map
    averages with weight 1/size per stored element.
    """

    diagonals: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.diagonals:
            raise ValueError("an averaging map needs at least one unitary")
        dim = len(self.diagonals[0])
        for w in self.diagonals:
            if w.ndim != 1 or len(w) != dim:
                raise ValueError("all diagonals must share one dimension")
            if np.max(np.abs(np.abs(w) - 1.0)) > ATOL_ALGEBRAIC:
                raise ValueError("averaging-map elements must be unitary diagonals")

    @property
    def dim(self) -> int:
        return len(self.diagonals[0])

    @property
    def size(self) -> int:
        return len(self.diagonals)

    def as_matrices(self) -> list[np.ndarray]:
        return [np.diag(w) for w in self.diagonals]

    @staticmethod
    def trivial(dim: int) -> "AveragingMap":
        return AveragingMap(diagonals=(np.ones(dim, dtype=complex),))


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """A drift after an averaging map, with the map that produced it."""

    matrix: np.ndarray
    source_map: AveragingMap

    def __post_init__(self):
        require_hermitian(self.matrix)


def apply_map(avg: AveragingMap, h: np.ndarray) -> EffectiveHamiltonian:
    """(1/|V|) sum_v v^dag H v for Hermitian H."""
    h = require_hermitian(h)
    if h.shape[0] != avg.dim:
        raise ValueError(f"dimension mismatch: map {avg.dim}, matrix {h.shape[0]}")
    acc = np.zeros_like(h)
    for w in avg.diagonals:
        acc += w.conj()[:, None] * h * w[None, :]
    return EffectiveHamiltonian(matrix=acc / avg.size, source_map=avg)


def vertex_removal_map(j: int, d: int) -> AveragingMap:
    """V = {1, 1 - 2P_j}; averaging zeroes row and column j of any
    zero-diagonal Hermitian matrix and leaves the rest untouched."""
    if not 1 <= j <= d:
        raise ValueError(f"vertex {j} out of range 1..{d}")
    flip = np.ones(d, dtype=complex)
    flip[j - 1] = -1.0
    return AveragingMap(diagonals=(np.ones(d, dtype=complex), flip))


def compose_maps(maps: list[AveragingMap]) -> AveragingMap:
    """Flatten a concatenation M_1(M_2(...)) into a single averaging map.

    The flattened unitary set is all products v_1 v_2 ... (diagonals
    commute, so the product order is immaterial); its size is the product
    of the sizes, duplicates included.
    """
    if not maps:
        raise ValueError("compose_maps needs at least one map")
    dim = maps[0].dim
    for m in maps:
        if m.dim != dim:
            raise ValueError("maps must share one dimension")
    products = [np.ones(dim, dtype=complex)]
    for m in maps:
        products = [p * w for p in products for w in m.diagonals]
    return AveragingMap(diagonals=tuple(products))


def isolate_edge(
    graph: HamiltonianGraph, edge: tuple[int, int]
) -> tuple[AveragingMap, EffectiveHamiltonian, DiagonalPhases]:
    """Remove every vertex except the edge's endpoints, then remove the
    surviving coupling's phase by a diagonal conjugation.

    Returns the composed map, the effective single-edge Hamiltonian
    |g| * (|n><m| + |m><n|) (built exactly), and the conjugation phases D
    such that D^dag M(H0) D equals that matrix.
    """
    n, m = edge
    if n > m:
        n, m = m, n
    if not graph.has_edge(n, m):
        raise ValueError(f"edge ({n},{m}) not in the graph")
    d = graph.dim
    removals = [vertex_removal_map(j, d) for j in range(1, d + 1) if j not in (n, m)]
    avg = compose_maps(removals) if removals else AveragingMap.trivial(d)
    g = graph.coupling(n, m)
    effective = np.zeros((d, d), dtype=complex)
    effective[n - 1, m - 1] = abs(g)
    effective[m - 1, n - 1] = abs(g)
    # D = diag(e^{i theta}) with theta_n - theta_m = arg(g) rotates the
    # surviving entry onto the positive real axis.
    thetas = [0.0] * d
    thetas[n - 1] = float(np.angle(g))
    correction = DiagonalPhases(thetas=tuple(thetas))
    return avg, EffectiveHamiltonian(matrix=effective, source_map=avg), correction


def trotter_sequence(avg: AveragingMap, h: np.ndarray, t: float, n: int) -> np.ndarray:
    """(Lambda_{t/n})^n with Lambda_{t/n} = prod_v v^dag exp(-iH t/(|V|n)) v.

    The product runs left to right over the stored unitary list (the limit
    is order-independent, finite n is not). Converges to
    exp(-i M(H) t) at rate O(1/n).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    h = require_hermitian(h)
    step = mat_exp(h, t / (avg.size * n))
    lam = np.eye(avg.dim, dtype=complex)
    for w in avg.diagonals:
        lam = lam @ (w.conj()[:, None] * step * w[None, :])
    return np.linalg.matrix_power(lam, n)
