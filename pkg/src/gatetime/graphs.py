"""Weighted undirected graphs as drift Hamiltonians.

A graph on vertices 1..d with complex couplings g_{n,m} on its edges stands
for the zero-diagonal Hermitian matrix with entry g_{n,m} at (n, m) for
n < m and the conjugate at (m, n). Edge weights are the magnitudes
|g_{n,m}|, edge phases the arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import ATOL_ALGEBRAIC, DiagonalPhases

Edge = tuple[int, int, complex]


class DisconnectedGraphError(ValueError):
    """Raised when an operation requires a connected coupling graph."""


@dataclass(frozen=True)
class HamiltonianGraph:
    """Vertices 1..dim, edges (n, m, g) with n < m and |g| > 0."""

    dim: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        seen = set()
        for n, m, g in self.edges:
            if not (1 <= n < m <= self.dim):
                raise ValueError(f"edge ({n},{m}) invalid for dim {self.dim}")
            if (n, m) in seen:
                raise ValueError(f"duplicate edge ({n},{m})")
            if abs(g) == 0.0:
                raise ValueError(f"edge ({n},{m}) has zero coupling")
            seen.add((n, m))

    @staticmethod
    def from_edges(dim: int, edges) -> "HamiltonianGraph":
        """Build a graph, normalizing edge orientation: (m, n, g) with m > n
        is stored as (n, m, conj(g))."""
        normalized = []
        for n, m, g in edges:
            g = complex(g)
            if n > m:
                n, m, g = m, n, g.conjugate()
            normalized.append((int(n), int(m), g))
        normalized.sort(key=lambda e: (e[0], e[1]))
        return HamiltonianGraph(dim=dim, edges=tuple(normalized))

    def coupling(self, n: int, m: int) -> complex:
        """Matrix entry at (n, m); conjugated when n > m."""
        a, b = (n, m) if n < m else (m, n)
        for en, em, g in self.edges:
            if (en, em) == (a, b):
                return g if n < m else g.conjugate()
        raise KeyError(f"edge ({n},{m}) not present")

    def has_edge(self, n: int, m: int) -> bool:
        a, b = (n, m) if n < m else (m, n)
        return any((en, em) == (a, b) for en, em, g in self.edges)

    def neighbors(self, n: int) -> list[int]:
        out = []
        for en, em, _ in self.edges:
            if en == n:
                out.append(em)
            elif em == n:
                out.append(en)
        return sorted(out)


@dataclass(frozen=True)
class ControlSystem:
    """A drift graph together with the implicit diagonal controls
    P_n = |n><n| for every level n (one unconstrained field per level)."""

    graph: HamiltonianGraph

    @property
    def dim(self) -> int:
        return self.graph.dim


@dataclass(frozen=True)
class PhaseNormalization:
    """Result of trying to remove all edge phases with one diagonal
    conjugation.

    When ``correction`` is set, conj(D) @ H @ D with D = correction.matrix()
    has real positive couplings and equals to_matrix(graph). Otherwise the
    input graph had phase-inconsistent cycles; it is returned unchanged and
    ``deferred_edges`` lists the edges whose phases must be removed
    individually when each edge is isolated.
    """

    graph: HamiltonianGraph
    correction: DiagonalPhases | None
    deferred_edges: tuple[tuple[int, int], ...] = ()


def to_matrix(graph: HamiltonianGraph) -> np.ndarray:
    """Zero-diagonal Hermitian matrix of the graph."""
    h = np.zeros((graph.dim, graph.dim), dtype=complex)
    for n, m, g in graph.edges:
        h[n - 1, m - 1] = g
        h[m - 1, n - 1] = g.conjugate()
    return h


def is_connected(graph: HamiltonianGraph) -> bool:
    if graph.dim == 1:
        return True
    adj: dict[int, list[int]] = {v: [] for v in range(1, graph.dim + 1)}
    for n, m, _ in graph.edges:
        adj[n].append(m)
        adj[m].append(n)
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == graph.dim


def g_min(graph: HamiltonianGraph) -> float:
    """Smallest edge weight |g_{n,m}|."""
    if not graph.edges:
        raise ValueError("g_min undefined for an edgeless graph")
    return min(abs(g) for _, _, g in graph.edges)


def normalize_phases(graph: HamiltonianGraph) -> PhaseNormalization:
    """Remove edge phases by a diagonal conjugation when one exists.

    Solving theta_n - theta_m = phi_{n,m} along a spanning forest always
    works; the remaining edges are consistent iff phases sum to zero around
    every cycle. Inconsistent graphs are returned unchanged with their
    phased edges marked for removal at isolation time.
    """
    theta = {}
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in range(1, graph.dim + 1)}
    for n, m, g in graph.edges:
        phi = float(np.angle(g))
        adj[n].append((m, phi))        # theta_n - theta_m = phi
        adj[m].append((n, -phi))
    for root in range(1, graph.dim + 1):
        if root in theta:
            continue
        theta[root] = 0.0
        stack = [root]
        while stack:
            v = stack.pop()
            for w, phi in adj[v]:
                if w not in theta:
                    theta[w] = theta[v] - phi
                    stack.append(w)
    # Consistency of every edge under the forest solution.
    consistent = True
    for n, m, g in graph.edges:
        phi = float(np.angle(g))
        residual = (theta[n] - theta[m] - phi + np.pi) % (2 * np.pi) - np.pi
        if abs(residual) > ATOL_ALGEBRAIC:
            consistent = False
            break
    if not consistent:
        deferred = tuple(
            (n, m) for n, m, g in graph.edges if abs(np.angle(g)) > ATOL_ALGEBRAIC
        )
        return PhaseNormalization(graph=graph, correction=None, deferred_edges=deferred)
    new_edges = tuple((n, m, complex(abs(g))) for n, m, g in graph.edges)
    correction = DiagonalPhases(thetas=tuple(theta[v] for v in range(1, graph.dim + 1)))
    return PhaseNormalization(
        graph=HamiltonianGraph(dim=graph.dim, edges=new_edges),
        correction=correction,
    )


def tight_binding_coupling(d: int) -> float:
    return 1.0 / np.sqrt(2.0 * (d - 1))


def tight_binding(d: int) -> HamiltonianGraph:
    """Path graph 1-2-...-d with uniform coupling 1/sqrt(2(d-1)), which
    normalizes the drift to unit Hilbert-Schmidt norm."""
    if d < 2:
        raise ValueError(f"tight-binding chain needs d >= 2, got {d}")
    j = tight_binding_coupling(d)
    return HamiltonianGraph(
        dim=d, edges=tuple((k, k + 1, complex(j)) for k in range(1, d))
    )


def random_weights(
    graph: HamiltonianGraph,
    low: float = 1.0,
    high: float = 2.0,
    seed=None,
) -> HamiltonianGraph:
    """Same topology with weights drawn i.i.d. uniform [low, high].

    Phases of existing couplings are preserved. Deterministic for a fixed
    seed (edges are sampled in sorted order).
    """
    if low <= 0:
        raise ValueError(f"low must be > 0, got {low}")
    if high < low:
        raise ValueError(f"need high >= low, got [{low}, {high}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    new_edges = []
    for n, m, g in graph.edges:
        w = rng.uniform(low, high)
        phase = g / abs(g)
        new_edges.append((n, m, w * phase))
    return HamiltonianGraph(dim=graph.dim, edges=tuple(new_edges))


# -- enumeration of connected graphs up to isomorphism ----------------------

ENUMERATION_MAX_DIM = 7  # d! canonicalization; beyond this it is out of scope


def _pair_index(d: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(d), 2))


def _mask_connected(mask: int, d: int, pairs: list[tuple[int, int]]) -> bool:
    adj = [0] * d
    for k, (i, j) in enumerate(pairs):
        if mask >> k & 1:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
    frontier = 1
    seen = 1
    while frontier:
        nxt = 0
        for v in range(d):
            if frontier >> v & 1:
                nxt |= adj[v]
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << d) - 1


def enumerate_connected_graphs(d: int) -> list[HamiltonianGraph]:
    """One unit-weight representative per isomorphism class of connected
    simple graphs on d vertices, in ascending canonical-bitmask order.

    Canonical form is the minimal edge bitmask over all d! vertex
    permutations; brute force is exact at this scale. Counts for d = 2..6
    are 1, 2, 6, 21, 112.
    """
    if not (2 <= d <= ENUMERATION_MAX_DIM):
        raise ValueError(f"enumeration supports 2 <= d <= {ENUMERATION_MAX_DIM}, got {d}")
    pairs = _pair_index(d)
    npairs = len(pairs)
    pos = {p: k for k, p in enumerate(pairs)}
    # For each permutation, where each edge bit moves.
    perm_maps = []
    for perm in itertools.permutations(range(d)):
        perm_maps.append(
            [pos[tuple(sorted((perm[i], perm[j])))] for (i, j) in pairs]
        )
    seen = bytearray(1 << npairs)
    out = []
    for mask in range(1 << npairs):
        if seen[mask]:
            continue
        # Ascending scan: the first unseen member of an orbit is its minimum.
        for pmap in perm_maps:
            image = 0
            rest = mask
            while rest:
                low = rest & -rest
                image |= 1 << pmap[low.bit_length() - 1]
                rest ^= low
            seen[image] = 1
        if _mask_connected(mask, d, pairs):
            edges = tuple(
                (i + 1, j + 1, 1 + 0j)
                for k, (i, j) in enumerate(pairs)
                if mask >> k & 1
            )
            out.append(HamiltonianGraph(dim=d, edges=edges))
    return out


def canonical_form(graph: HamiltonianGraph) -> int:
    """Minimal adjacency bitmask over all vertex permutations (weights and
    phases ignored). Usable as a topology identifier for d <= 7."""
    d = graph.dim
    if d > ENUMERATION_MAX_DIM:
        raise ValueError(f"canonical_form supports d <= {ENUMERATION_MAX_DIM}")
    pairs = _pair_index(d)
    pos = {p: k for k, p in enumerate(pairs)}
    mask = 0
    for n, m, _ in graph.edges:
        mask |= 1 << pos[(n - 1, m - 1)]
    best = None
    for perm in itertools.permutations(range(d)):
        image = 0
        rest = mask
        while rest:
            low = rest & -rest
            i, j = pairs[low.bit_length() - 1]
            image |= 1 << pos[tuple(sorted((perm[i], perm[j])))]
            rest ^= low
        if best is None or image < best:
            best = image
    return best if best is not None else 0
