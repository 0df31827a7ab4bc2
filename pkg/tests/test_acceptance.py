"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py -v`).

The heavy criterion (the figure pipelines) runs at desk scale with
pinned seeds; everything here is deterministic.
"""

import math
import os
from contextlib import contextmanager

import numpy as np

from gatetime.bounds import (
    QubitNetworkSpec,
    cnot_bound,
    s_function,
    tb_bounds,
    unitary_qubit_bound,
    upper_bound_edge,
    upper_bound_unitary,
    variational_lower_bound,
)
from gatetime.decoupling import apply_map, isolate_edge, trotter_sequence
from gatetime.experiments import exp_fig1, exp_fig2, exp_fig3
from gatetime.graphs import (
    ControlSystem,
    HamiltonianGraph,
    enumerate_connected_graphs,
    g_min,
    random_weights,
    tight_binding,
    to_matrix,
)
from gatetime.grape import (
    GrapeConfig,
    _gradient,
    _slice_eigs,
    _time_ordered_product,
    minimum_time_scan,
    minimum_time_search,
)
from gatetime.linalg import (
    edge_operator,
    gate_error,
    hs_norm,
    mat_exp,
    random_unitary,
)
from gatetime.synthesis import (
    brute_force_path_search,
    shortest_time_path,
    simulate,
    swap_chain_schedule,
    synthesize,
)

JOBS = min(2, os.cpu_count() or 1)


@contextmanager
def criterion(number: int, label: str):
    try:
        yield
    except Exception:
        print(f"[criterion {number}] FAIL: {label}", flush=True)
        raise
    print(f"[criterion {number}] PASS: {label}", flush=True)


def sample_connected(d: int, rng: np.random.Generator) -> HamiltonianGraph:
    pool = enumerate_connected_graphs(d)
    base = pool[int(rng.integers(0, len(pool)))]
    return random_weights(base, 1.0, 2.0, seed=rng)


def test_criterion_1_bound_formula_fidelity():
    with criterion(1, "closed-form bounds match their formulas to 1e-12"):
        for d in range(2, 7):
            assert abs(
                upper_bound_unitary(d, 1.0) - math.pi / 2 * d**2 * (d - 1)
            ) <= 1e-12
            assert abs(
                upper_bound_edge(d, math.pi / 2, 1.0) - math.pi * (d - 1.5)
            ) <= 1e-12
            lower, upper = tb_bounds(d)
            assert abs(lower - math.sqrt(2) * (d - 1)) <= 1e-12
            assert abs(
                upper - (math.pi / 2) * (2 * d - 3) * math.sqrt(2 * (d - 1))
            ) <= 1e-12


def test_criterion_2_constructive_unitary_synthesis():
    with criterion(2, "synthesis: error < 1e-9 and time within the cubic bound"):
        rng = np.random.default_rng(1001)
        violations = 0
        for d in (2, 3, 4, 5):
            fixed_bound = math.pi * d**2 * (d - 1) / 2.0
            for _ in range(20):
                graph = sample_connected(d, rng)
                for _ in range(5):
                    target = random_unitary(d, rng)
                    schedule = synthesize(graph, target)
                    err = gate_error(simulate(schedule), target)
                    ok = err < 1e-9 and schedule.total_time <= fixed_bound
                    # weights >= 1, so the fixed bound dominates the
                    # g_min-dependent one
                    assert schedule.total_time <= (
                        math.pi * d**2 * (d - 1) / (2 * g_min(graph)) + 1e-9
                    )
                    violations += 0 if ok else 1
        assert violations == 0


def test_criterion_3_swap_chain_and_path_optimality():
    with criterion(3, "SWAP chains: planner costs, worst-case bound, exhaustive paths"):
        rng = np.random.default_rng(2002)
        for d in range(2, 7):
            for _ in range(10):
                graph = sample_connected(d, rng)
                n = int(rng.integers(1, d + 1))
                m = n
                while m == n:
                    m = int(rng.integers(1, d + 1))
                alpha = float(rng.uniform(-math.pi / 2, math.pi / 2))
                path, t_fast = shortest_time_path(graph, n, m, alpha)
                _, t_brute = brute_force_path_search(graph, n, m, alpha)
                assert abs(t_fast - t_brute) <= 1e-12
                schedule = swap_chain_schedule(graph, n, m, alpha)
                assert abs(schedule.total_time - t_fast) <= 1e-12
                assert schedule.total_time <= (
                    (abs(alpha) + math.pi * (d - 2)) / g_min(graph) + 1e-12
                )
                target = mat_exp(edge_operator(d, n, m), alpha)
                assert gate_error(simulate(schedule), target) < 1e-9


def test_criterion_4_decoupling_exactness_and_trotter_rate():
    with criterion(4, "edge isolation is exact; Trotter error is first order"):
        rng = np.random.default_rng(3003)
        for d in (3, 4, 5):
            graph = sample_connected(d, rng)
            n, m, w = graph.edges[int(rng.integers(0, len(graph.edges)))]
            avg, effective, _ = isolate_edge(graph, (n, m))
            upper = np.triu(effective.matrix, k=1)
            nz = np.argwhere(np.abs(upper) > 1e-12)
            assert [tuple(i) for i in nz] == [(n - 1, m - 1)]
            assert abs(abs(upper[n - 1, m - 1]) - abs(w)) <= 1e-12
            applied = apply_map(avg, to_matrix(graph)).matrix
            assert abs(abs(applied[n - 1, m - 1]) - abs(w)) <= 1e-12

        r = np.random.default_rng(42)
        graph = random_weights(enumerate_connected_graphs(4)[4], seed=r)
        h0 = to_matrix(graph)
        avg, _, _ = isolate_edge(graph, graph.edges[0][:2])
        limit = mat_exp(apply_map(avg, h0).matrix, 1.0)
        ns = (32, 64, 128, 256, 512)
        errs = [hs_norm(trotter_sequence(avg, h0, 1.0, n) - limit) for n in ns]
        slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert -1.3 <= slope <= -0.7


def test_criterion_5_variational_lower_bound():
    with criterion(5, "angle-function limit and chain-swap lower bound"):
        for d in range(2, 7):
            assert abs(s_function(np.zeros(d - 1)) - (d - 1) ** 2) <= 1e-6
        for d in (3, 4, 5):
            target = mat_exp(edge_operator(d, 1, d), math.pi / 2)
            value = variational_lower_bound(
                target, to_matrix(tight_binding(d)), starts=20, seed=0
            )
            assert value >= 0.999 * math.sqrt(2) * (d - 1)


def test_criterion_6_grape_sanity():
    with criterion(6, "two-level minimum time near pi/2; exact gradients"):
        system = ControlSystem(HamiltonianGraph.from_edges(2, [(1, 2, 1.0)]))
        target = mat_exp(edge_operator(2, 1, 2), math.pi / 2)
        cfg = GrapeConfig(
            num_slices=24, restarts=4, max_iters=400, t_resolution=0.02, seed=5
        )
        t_min, res = minimum_time_search(system, target, cfg)
        assert res.converged
        assert 0.9 * math.pi / 2 <= t_min <= 1.1 * math.pi / 2
        # independent fine scan around the quarter period
        t_scan, _ = minimum_time_scan(
            system, target, np.arange(1.2, 2.0, 0.05), cfg
        )
        assert abs(t_scan - t_min) <= 0.1 * math.pi / 2

        master = np.random.default_rng(99)
        for _ in range(10):
            d = int(master.integers(2, 5))
            graph = sample_connected(d, master)
            u_g = random_unitary(d, master)
            nslices = 6
            t = float(master.uniform(0.5, 2.5))
            dt = t / nslices
            fields = master.normal(size=(1, d, nslices))
            h0 = to_matrix(graph)
            props, evals, evecs = _slice_eigs(h0, fields, dt)
            grad, _, _ = _gradient(u_g, props, evals, evecs, dt)

            def fidelity(f):
                p, _, _ = _slice_eigs(h0, f[None], dt)
                z = np.einsum("ij,ij->", u_g.conj(), _time_ordered_product(p)[0])
                return abs(z) ** 2 / d**2

            eps = 1e-6
            fd = np.zeros((d, nslices))
            for a in range(d):
                for k in range(nslices):
                    fp = fields[0].copy()
                    fm = fields[0].copy()
                    fp[a, k] += eps
                    fm[a, k] -= eps
                    fd[a, k] = (fidelity(fp) - fidelity(fm)) / (2 * eps)
            scale = max(np.max(np.abs(fd)), 1e-12)
            assert np.max(np.abs(grad[0] - fd)) / scale < 1e-4


def test_criterion_7_figure_pipelines():
    with criterion(7, "figure pipelines: sandwich bounds hold, zero violations"):
        fig1 = exp_fig1([2, 3, 4, 5], jobs=JOBS)
        for d, lower, upper, t in fig1.rows:
            assert lower - fig1.config.t_resolution <= t <= upper + fig1.config.t_resolution
            # strict sandwich without slack is expected too
            assert lower <= t <= upper
        assert fig1.violations == []

        fig2 = exp_fig2([2, 3, 4], trials_per_graph=10, jobs=JOBS)
        for d, avg_t, max_t, bound in fig2.rows:
            assert avg_t <= max_t
            assert max_t <= bound
        assert fig2.violations == []

        fig3 = exp_fig3([2, 3], trials_per_graph=10, jobs=JOBS)
        for d, avg_t, max_t, bound in fig3.rows:
            assert avg_t <= max_t
            assert max_t <= bound
        assert fig3.violations == []


def test_criterion_8_qubit_network_bounds():
    with criterion(8, "qubit-network CNOT and gate-count bounds match closed forms"):
        n = 5
        path = QubitNetworkSpec(
            n=n, couplings={(i, i + 1): {("x", "x"): 1.0} for i in range(1, n)}
        )
        star = QubitNetworkSpec(
            n=n, couplings={(1, j): {("z", "z"): 1.0} for j in range(2, n + 1)}
        )

        def bfs_dist(edges, i, j):
            frontier, seen, steps = {i}, {i}, 0
            while frontier:
                steps += 1
                nxt = set()
                for q in frontier:
                    for a, b in edges:
                        w = b if a == q else (a if b == q else None)
                        if w == j:
                            return steps
                        if w is not None and w not in seen:
                            seen.add(w)
                            nxt.add(w)
                frontier = nxt
            raise AssertionError("disconnected")

        for spec in (path, star):
            edges = spec.edge_list()
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    dist = bfs_dist(edges, i, j)
                    assert spec.dist(i, j) == dist
                    expect = math.pi * (4 * dist - 3) / 4.0
                    assert abs(cnot_bound(spec, i, j) - expect) <= 1e-12
        for n_cnot in (0, 1, 4, 9):
            assert abs(
                unitary_qubit_bound(n, 1.0, n_cnot)
                - math.pi * (4 * n - 7) / 4.0 * n_cnot
            ) <= 1e-12
