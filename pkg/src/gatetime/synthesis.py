"""Pulse-schedule synthesis: time-optimal SWAP chains for two-level
rotations across the coupling graph, two-level/Euler decomposition of
arbitrary targets, and schedule simulation.

A schedule is a sequence of free diagonal pulses (the unconstrained
controls, zero duration) and timed edge evolutions (the drift, decoupled
down to one edge). Only edge evolutions cost time: angle alpha on an edge
of weight |g| takes alpha/|g|.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .decoupling import AveragingMap, isolate_edge, trotter_sequence
from .graphs import DisconnectedGraphError, HamiltonianGraph, is_connected, to_matrix
from .linalg import (
    ATOL_ALGEBRAIC,
    require_unitary,
)

ANGLE_EPS = 1e-12  # rotations below this compile to nothing / pure diagonals

# Fixed compiler conventions, recorded in schedule documents.
ELIMINATION_ORDER = "columns left-to-right, subdiagonal rows top-to-bottom"
TROTTER_ORDER = "left-to-right over the stored unitary list"


# -- schedule data types -----------------------------------------------------


@dataclass(frozen=True)
class DiagonalPulse:
    """Instantaneous control pulse exp(-i sum_n phases[n] P_n); zero duration."""

    phases: tuple[float, ...]

    def unitary_diagonal(self) -> np.ndarray:
        return np.exp(-1j * np.asarray(self.phases))

    def unitary(self) -> np.ndarray:
        return np.diag(self.unitary_diagonal())

    @staticmethod
    def from_diagonal(diag: np.ndarray) -> "DiagonalPulse":
        """Pulse whose unitary is diag(d) for unit-modulus entries d."""
        return DiagonalPulse(phases=tuple(-np.angle(np.asarray(diag))))


@dataclass(frozen=True)
class EdgeEvolution:
    """Drift evolution with everything but one edge decoupled away.

    alpha = duration * |g| is the rotation angle generated on the edge
    (about the edge's own phased generator, phase corrections are separate
    diagonal pulses).
    """

    edge: tuple[int, int]
    alpha: float
    duration: float
    decoupling_map: AveragingMap


Step = DiagonalPulse | EdgeEvolution


@dataclass(frozen=True)
class PulseSchedule:
    graph: HamiltonianGraph
    steps: tuple[Step, ...]

    def __post_init__(self):
        for s in self.steps:
            if isinstance(s, EdgeEvolution):
                n, m = s.edge
                if not self.graph.has_edge(n, m):
                    raise ValueError(f"edge evolution on ({n},{m}) not in the graph")

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.steps if isinstance(s, EdgeEvolution))


@dataclass(frozen=True)
class TwoLevelUnitary:
    """U(d) element acting nontrivially only on span{|n>,|m>} (1-based, n < m)."""

    levels: tuple[int, int]
    block: np.ndarray

    def embed(self, dim: int) -> np.ndarray:
        n, m = self.levels
        u = np.eye(dim, dtype=complex)
        idx = np.ix_((n - 1, m - 1), (n - 1, m - 1))
        u[idx] = self.block
        return u


@dataclass(frozen=True)
class EulerAngles:
    """Factorization block = e^{i delta} Rz(a) Rx(theta) Rz(b), theta in [0, pi]."""

    a: float
    b: float
    theta: float
    delta: float

    def block(self) -> np.ndarray:
        c = np.cos(self.theta / 2)
        s = np.sin(self.theta / 2)
        rz_a = np.diag([np.exp(-0.5j * self.a), np.exp(0.5j * self.a)])
        rz_b = np.diag([np.exp(-0.5j * self.b), np.exp(0.5j * self.b)])
        rx = np.array([[c, -1j * s], [-1j * s, c]])
        return np.exp(1j * self.delta) * (rz_a @ rx @ rz_b)


# -- path planning -----------------------------------------------------------


def _fold_angle(alpha: float) -> tuple[float, float, bool]:
    """Reduce a rotation angle to [0, pi/2].

    Returns (alpha_eff, psi_shift, block_flip): the original rotation
    exp(-i alpha B^psi) equals exp(-i alpha_eff B^{psi + psi_shift}) times,
    when block_flip is set, the free pulse -1 on the two levels.
    """
    a = math.remainder(alpha, 2 * math.pi)  # (-pi, pi]
    psi_shift = 0.0
    flip = False
    if a < 0:
        a = -a
        psi_shift += math.pi
    if a > math.pi / 2 + ANGLE_EPS:
        a = math.pi - a
        psi_shift += math.pi
        flip = True
    return a, psi_shift, flip


def shortest_time_path(
    graph: HamiltonianGraph, n: int, m: int, alpha: float
) -> tuple[list[int], float]:
    """Cheapest vertex path n -> m for a SWAP-chain rotation by alpha.

    Cost of a path p_1..p_N is alpha_eff/|g_{p_{N-1},p_N}| on the final
    edge plus pi/|g| per interior edge (a SWAP each way), with alpha folded
    into [0, pi/2]. Every interior hop avoids m, so a Dijkstra pass on the
    graph without m plus a minimization over m's incident edges is exact.
    """
    if not is_connected(graph):
        raise DisconnectedGraphError("shortest_time_path requires a connected graph")
    d = graph.dim
    if not (1 <= n <= d and 1 <= m <= d) or n == m:
        raise ValueError(f"invalid vertex pair ({n},{m}) for dim {d}")
    alpha_eff, _, _ = _fold_angle(alpha)

    dist = {v: math.inf for v in range(1, d + 1)}
    prev: dict[int, int] = {}
    dist[n] = 0.0
    heap = [(0.0, n)]
    while heap:
        cost, u = heapq.heappop(heap)
        if cost > dist[u]:
            continue
        for v in graph.neighbors(u):
            if v == m:
                continue
            c = cost + math.pi / abs(graph.coupling(u, v))
            if c < dist[v] - 1e-15:
                dist[v] = c
                prev[v] = u
                heapq.heappush(heap, (c, v))

    best: tuple[float, int] | None = None
    for u in graph.neighbors(m):
        if math.isinf(dist[u]):
            continue
        total = dist[u] + alpha_eff / abs(graph.coupling(u, m))
        if best is None or total < best[0] - 1e-15:
            best = (total, u)
    if best is None:
        raise DisconnectedGraphError(f"no path from {n} to {m}")
    path = [m, best[1]]
    while path[-1] != n:
        path.append(prev[path[-1]])
    path.reverse()
    return path, best[0]


def brute_force_path_search(
    graph: HamiltonianGraph, n: int, m: int, alpha: float
) -> tuple[list[int], float]:
    """Exhaustive minimum over all simple paths n -> m (oracle; d <= 7)."""
    alpha_eff, _, _ = _fold_angle(alpha)
    best_path: list[int] | None = None
    best_time = math.inf

    def walk(path: list[int], interior_cost: float):
        nonlocal best_path, best_time
        u = path[-1]
        for v in graph.neighbors(u):
            if v == m:
                total = interior_cost + alpha_eff / abs(graph.coupling(u, v))
                if total < best_time:
                    best_time = total
                    best_path = path + [v]
            elif v not in path:
                walk(path + [v], interior_cost + math.pi / abs(graph.coupling(u, v)))

    walk([n], 0.0)
    if best_path is None:
        raise DisconnectedGraphError(f"no path from {n} to {m}")
    return best_path, best_time


# -- SWAP-chain construction -------------------------------------------------


class _EdgeMapCache:
    """Per-build cache of isolating decoupling maps, one per edge."""

    def __init__(self, graph: HamiltonianGraph):
        self.graph = graph
        self._maps: dict[tuple[int, int], AveragingMap] = {}

    def get(self, n: int, m: int) -> AveragingMap:
        key = (n, m) if n < m else (m, n)
        if key not in self._maps:
            self._maps[key], _, _ = isolate_edge(self.graph, key)
        return self._maps[key]


def _wrapped(angle: float) -> float:
    return math.remainder(angle, 2 * math.pi)


def _rotation_steps(
    graph: HamiltonianGraph,
    cache: _EdgeMapCache,
    a: int,
    b: int,
    psi: float,
    alpha: float,
) -> list[Step]:
    """Steps realizing exp(-i alpha (e^{i psi}|a><b| + h.c.)) on graph edge
    (a, b), alpha >= 0: one edge evolution, conjugated by a diagonal pulse
    when psi differs from the edge's own coupling phase."""
    if alpha < ANGLE_EPS:
        return []
    g_ab = graph.coupling(a, b)
    phi = float(np.angle(g_ab))
    evolution = EdgeEvolution(
        edge=(a, b) if a < b else (b, a),
        alpha=alpha,
        duration=alpha / abs(g_ab),
        decoupling_map=cache.get(a, b),
    )
    delta = _wrapped(psi - phi)
    if abs(delta) <= ATOL_ALGEBRAIC:
        return [evolution]
    diag = np.ones(graph.dim, dtype=complex)
    diag[b - 1] = np.exp(1j * delta)  # D: theta_b - theta_a = psi - phi
    return [
        DiagonalPulse.from_diagonal(diag),
        evolution,
        DiagonalPulse.from_diagonal(diag.conj()),
    ]


def _chain_steps(
    graph: HamiltonianGraph,
    cache: _EdgeMapCache,
    path: list[int],
    psi: float,
    alpha: float,
) -> list[Step]:
    """Steps realizing exp(-i alpha (e^{i psi}|p1><pN| + h.c.)) along a path.

    SWAP the excitation down the chain, rotate on the final edge, SWAP
    back. Each forward SWAP is a bare pi/2 edge evolution; its inverse is
    the same evolution sandwiched by free pulses; the -i SWAP phases are
    absorbed into the inner rotation's phase reference.
    """
    if len(path) == 2:
        return _rotation_steps(graph, cache, path[0], path[1], psi, alpha)
    a, b = path[0], path[1]
    phi = float(np.angle(graph.coupling(a, b)))
    forward = _rotation_steps(graph, cache, a, b, phi, math.pi / 2)
    backward = _rotation_steps(graph, cache, a, b, phi + math.pi, math.pi / 2)
    inner = _chain_steps(graph, cache, path[1:], psi - phi - math.pi / 2, alpha)
    return forward + inner + backward


def _merge_diagonals(steps: list[Step]) -> tuple[Step, ...]:
    """Coalesce runs of diagonal pulses; drop pulses that are identities."""
    out: list[Step] = []
    pending: np.ndarray | None = None
    for s in steps:
        if isinstance(s, DiagonalPulse):
            pending = s.unitary_diagonal() if pending is None else pending * s.unitary_diagonal()
        else:
            if pending is not None:
                if np.max(np.abs(pending - 1.0)) > ATOL_ALGEBRAIC:
                    out.append(DiagonalPulse.from_diagonal(pending))
                pending = None
            out.append(s)
    if pending is not None and np.max(np.abs(pending - 1.0)) > ATOL_ALGEBRAIC:
        out.append(DiagonalPulse.from_diagonal(pending))
    return tuple(out)


def _block_flip_pulse(dim: int, n: int, m: int) -> DiagonalPulse:
    diag = np.ones(dim, dtype=complex)
    diag[n - 1] = -1.0
    diag[m - 1] = -1.0
    return DiagonalPulse.from_diagonal(diag)


def _swap_chain_steps(
    graph: HamiltonianGraph,
    cache: _EdgeMapCache,
    n: int,
    m: int,
    alpha: float,
) -> list[Step]:
    alpha_eff, psi, flip = _fold_angle(alpha)
    steps: list[Step] = [_block_flip_pulse(graph.dim, n, m)] if flip else []
    if alpha_eff >= ANGLE_EPS:
        path, _ = shortest_time_path(graph, n, m, alpha)
        steps += _chain_steps(graph, cache, path, psi, alpha_eff)
    return steps


def swap_chain_schedule(
    graph: HamiltonianGraph, n: int, m: int, alpha: float
) -> PulseSchedule:
    """Schedule implementing exp(-i alpha (|n><m| + |m><n|)) exactly for any
    vertex pair of the complete graph, via the cheapest SWAP chain."""
    if not is_connected(graph):
        raise DisconnectedGraphError("swap_chain_schedule requires a connected graph")
    cache = _EdgeMapCache(graph)
    steps = _swap_chain_steps(graph, cache, n, m, alpha)
    return PulseSchedule(graph=graph, steps=_merge_diagonals(steps))


# -- two-level and Euler decomposition ---------------------------------------


_ELIM_EPS = 1e-14


def two_level_decompose(u: np.ndarray) -> list[TwoLevelUnitary]:
    """Factor a unitary into at most d(d-1)/2 two-level unitaries whose
    in-order product reconstructs it.

    Column-by-column Givens-style elimination of subdiagonal entries,
    left to right; residual diagonal phases fold into the last factor when
    it acts on the same levels, else into dedicated diagonal factors.
    """
    u = require_unitary(u)
    d = u.shape[0]
    if d < 2:
        raise ValueError("two-level decomposition needs dim >= 2")
    a = u.copy()
    factors: list[tuple[int, int, np.ndarray]] = []  # (i, j, block) 0-based i<j
    for col in range(d - 1):
        for row in range(col + 1, d):
            b_entry = a[row, col]
            if abs(b_entry) <= _ELIM_EPS:
                continue
            a_entry = a[col, col]
            r = math.hypot(abs(a_entry), abs(b_entry))
            g2 = (
                np.array(
                    [
                        [a_entry.conjugate(), b_entry.conjugate()],
                        [b_entry, -a_entry],
                    ]
                )
                / r
            )
            a[(col, row), :] = g2 @ a[(col, row), :]
            factors.append((col, row, g2.conj().T))
    residual = np.diagonal(a).copy()
    nontrivial = [k for k in range(d) if abs(residual[k] - 1.0) > _ELIM_EPS]
    if nontrivial:
        if factors and set(nontrivial) <= set(factors[-1][:2]):
            i, j, blk = factors[-1]
            factors[-1] = (i, j, blk @ np.diag([residual[i], residual[j]]))
        else:
            while nontrivial:
                if len(nontrivial) >= 2:
                    i, j = nontrivial[0], nontrivial[1]
                    nontrivial = nontrivial[2:]
                else:
                    k = nontrivial.pop()
                    i, j = (k, k + 1) if k + 1 < d else (k - 1, k)
                lo, hi = min(i, j), max(i, j)
                factors.append(
                    (lo, hi, np.diag([residual[lo], residual[hi]]))
                )
                residual[lo] = 1.0
                residual[hi] = 1.0
    return [
        TwoLevelUnitary(levels=(i + 1, j + 1), block=blk) for i, j, blk in factors
    ]


def euler_decompose(v: TwoLevelUnitary | np.ndarray) -> EulerAngles:
    """ZXZ Euler angles of a 2x2 unitary: block = e^{i delta} Rz(a) Rx(theta) Rz(b)
    with theta in [0, pi]."""
    w = v.block if isinstance(v, TwoLevelUnitary) else np.asarray(v, dtype=complex)
    w = require_unitary(w)
    if w.shape != (2, 2):
        raise ValueError(f"expected a 2x2 block, got {w.shape}")
    delta = 0.5 * float(np.angle(np.linalg.det(w)))
    ws = np.exp(-1j * delta) * w
    x, y = ws[0, 0], ws[0, 1]
    c, s = abs(x), abs(y)
    theta = 2.0 * math.atan2(s, c)
    if s <= _ELIM_EPS:
        a = -2.0 * float(np.angle(x))
        b = 0.0
    elif c <= _ELIM_EPS:
        a = -2.0 * float(np.angle(y)) - math.pi
        b = 0.0
    else:
        sum_ab = -2.0 * float(np.angle(x))
        diff_ab = -2.0 * float(np.angle(y)) - math.pi
        a = (sum_ab + diff_ab) / 2.0
        b = (sum_ab - diff_ab) / 2.0
    # a and b are half-angle parameters (4*pi periodic); do not wrap mod 2*pi.
    return EulerAngles(a=a, b=b, theta=theta, delta=delta)


# -- full synthesis ----------------------------------------------------------


def _factor_steps(
    graph: HamiltonianGraph, cache: _EdgeMapCache, factor: TwoLevelUnitary
) -> list[Step]:
    """Steps for one two-level factor: free z-pulses plus one SWAP-chain
    x-rotation by half the Euler angle."""
    n, m = factor.levels
    d = graph.dim
    angles = euler_decompose(factor)
    if angles.theta < ANGLE_EPS:
        diag = np.ones(d, dtype=complex)
        blk = np.diagonal(factor.block)
        diag[n - 1] = blk[0] / abs(blk[0])
        diag[m - 1] = blk[1] / abs(blk[1])
        return [DiagonalPulse.from_diagonal(diag)]
    pre = np.ones(d, dtype=complex)  # Rz(b), applied first
    pre[n - 1] = np.exp(-0.5j * angles.b)
    pre[m - 1] = np.exp(0.5j * angles.b)
    post = np.ones(d, dtype=complex)  # e^{i delta} Rz(a) on the block
    post[n - 1] = np.exp(1j * (angles.delta - angles.a / 2))
    post[m - 1] = np.exp(1j * (angles.delta + angles.a / 2))
    return (
        [DiagonalPulse.from_diagonal(pre)]
        + _swap_chain_steps(graph, cache, n, m, angles.theta / 2)
        + [DiagonalPulse.from_diagonal(post)]
    )


def synthesize(graph: HamiltonianGraph, target: np.ndarray) -> PulseSchedule:
    """Schedule implementing an arbitrary unitary target on the control
    system of the graph: two-level factors, each compiled to free diagonal
    pulses plus one SWAP-chain rotation."""
    if not is_connected(graph):
        raise DisconnectedGraphError("synthesis requires a connected graph")
    target = require_unitary(target)
    if target.shape[0] != graph.dim:
        raise ValueError(
            f"target dim {target.shape[0]} != graph dim {graph.dim}"
        )
    cache = _EdgeMapCache(graph)
    steps: list[Step] = []
    for factor in reversed(two_level_decompose(target)):
        steps += _factor_steps(graph, cache, factor)
    return PulseSchedule(graph=graph, steps=_merge_diagonals(steps))


# -- simulation --------------------------------------------------------------


def _edge_evolution_unitary(graph: HamiltonianGraph, step: EdgeEvolution) -> np.ndarray:
    """Exact unitary of a decoupled edge evolution: a two-level rotation by
    step.alpha about the edge's phased coupling."""
    n, m = step.edge
    g = graph.coupling(n, m)
    phase = g / abs(g)
    u = np.eye(graph.dim, dtype=complex)
    c, s = math.cos(step.alpha), math.sin(step.alpha)
    u[n - 1, n - 1] = c
    u[m - 1, m - 1] = c
    u[n - 1, m - 1] = -1j * s * phase
    u[m - 1, n - 1] = -1j * s * phase.conjugate()
    return u


def simulate(schedule: PulseSchedule, trotter_n: int | None = None) -> np.ndarray:
    """Unitary realized by a schedule.

    Ideal mode (default) multiplies exact step unitaries. With trotter_n,
    each edge evolution is replaced by its finite-n decoupling sequence
    under the full drift.
    """
    d = schedule.graph.dim
    u = np.eye(d, dtype=complex)
    h0 = to_matrix(schedule.graph) if trotter_n is not None else None
    for step in schedule.steps:
        if isinstance(step, DiagonalPulse):
            u = step.unitary_diagonal()[:, None] * u
        elif trotter_n is None:
            u = _edge_evolution_unitary(schedule.graph, step) @ u
        else:
            u = trotter_sequence(step.decoupling_map, h0, step.duration, trotter_n) @ u
    return u
