import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gatetime.graphs import (
    HamiltonianGraph,
    canonical_form,
    enumerate_connected_graphs,
    g_min,
    is_connected,
    normalize_phases,
    random_weights,
    tight_binding,
    tight_binding_coupling,
    to_matrix,
)

CONNECTED_COUNTS = {2: 1, 3: 2, 4: 6, 5: 21, 6: 112}


def random_connected(seed, dmin=2, dmax=5):
    r = np.random.default_rng(seed)
    d = int(r.integers(dmin, dmax + 1))
    pool = enumerate_connected_graphs(d)
    base = pool[int(r.integers(0, len(pool)))]
    edges = [
        (n, m, r.uniform(1, 2) * np.exp(1j * r.uniform(0, 2 * np.pi)))
        for n, m, _ in base.edges
    ]
    return HamiltonianGraph.from_edges(d, edges)


class TestToMatrix:
    def test_empty_graph_is_zero(self):
        g = HamiltonianGraph(dim=3, edges=())
        np.testing.assert_array_equal(to_matrix(g), np.zeros((3, 3)))

    def test_single_unit_edge(self):
        g = HamiltonianGraph.from_edges(2, [(1, 2, 1.0)])
        np.testing.assert_array_equal(to_matrix(g), [[0, 1], [1, 0]])

    def test_tight_binding_d3(self):
        h = to_matrix(tight_binding(3))
        j = 0.5  # 1/sqrt(2*(3-1))
        expect = j * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        np.testing.assert_allclose(h, expect, atol=1e-15)

    @given(seed=st.integers(0, 2**32 - 1))
    def test_hermitian_zero_diagonal(self, seed):
        h = to_matrix(random_connected(seed))
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12
        assert np.max(np.abs(np.diagonal(h))) == 0.0


class TestEdgeValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            HamiltonianGraph(dim=3, edges=((2, 2, 1.0),))

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            HamiltonianGraph(dim=3, edges=((1, 2, 1.0), (1, 2, 0.5)))

    def test_zero_coupling_rejected(self):
        with pytest.raises(ValueError):
            HamiltonianGraph(dim=2, edges=((1, 2, 0.0),))

    def test_orientation_normalized(self):
        g = HamiltonianGraph.from_edges(2, [(2, 1, 1j)])
        assert g.edges == ((1, 2, -1j),)
        assert g.coupling(2, 1) == 1j


class TestNormalizePhases:
    def test_already_real_is_trivial(self):
        g = tight_binding(4)
        res = normalize_phases(g)
        assert res.correction is not None
        assert res.correction.is_trivial()
        assert res.deferred_edges == ()

    def test_path_graph_phases_removed(self, rng):
        # Tree phases always admit a diagonal conjugation; verify it.
        edges = [
            (k, k + 1, rng.uniform(1, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
            for k in range(1, 5)
        ]
        g = HamiltonianGraph.from_edges(5, edges)
        res = normalize_phases(g)
        assert res.correction is not None
        conj = res.correction.matrix()
        transformed = conj.conj().T @ to_matrix(g) @ conj
        np.testing.assert_allclose(transformed, to_matrix(res.graph), atol=1e-12)
        for _, _, w in res.graph.edges:
            assert w.imag == 0.0 and w.real > 0.0

    def test_inconsistent_triangle_deferred(self):
        g = HamiltonianGraph.from_edges(
            3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, -1.0)]
        )
        res = normalize_phases(g)
        assert res.correction is None
        assert (1, 3) in res.deferred_edges
        assert res.graph == g

    def test_inconsistent_triangle_grid_oracle(self):
        # No point on a theta grid makes all couplings real positive: the
        # cycle's phases sum to pi, so no diagonal conjugation exists.
        g = HamiltonianGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, -1.0)])
        h = to_matrix(g)
        best = np.inf
        grid = np.linspace(0, 2 * np.pi, 24, endpoint=False)
        for t2, t3 in itertools.product(grid, grid):
            v = np.diag(np.exp(1j * np.array([0.0, t2, t3])))
            hh = v.conj().T @ h @ v
            dev = max(
                abs(hh[0, 1].imag) + max(0, -hh[0, 1].real),
                abs(hh[1, 2].imag) + max(0, -hh[1, 2].real),
                abs(hh[0, 2].imag) + max(0, -hh[0, 2].real),
            )
            best = min(best, dev)
        assert best > 0.1

    def test_consistent_cycle_normalized(self):
        # Phases summing to zero around the triangle are removable.
        g = HamiltonianGraph.from_edges(
            3,
            [(1, 2, np.exp(0.4j)), (2, 3, np.exp(0.9j)), (1, 3, np.exp(1.3j))],
        )
        res = normalize_phases(g)
        assert res.correction is not None
        conj = res.correction.matrix()
        np.testing.assert_allclose(
            conj.conj().T @ to_matrix(g) @ conj, to_matrix(res.graph), atol=1e-12
        )


class TestConnectivity:
    def test_single_edge(self):
        assert is_connected(HamiltonianGraph.from_edges(2, [(1, 2, 1.0)]))

    def test_two_components(self):
        g = HamiltonianGraph.from_edges(4, [(1, 2, 1.0), (3, 4, 1.0)])
        assert not is_connected(g)

    def test_tight_binding_chains(self):
        for d in range(2, 8):
            assert is_connected(tight_binding(d))

    def test_isolated_vertex(self):
        assert not is_connected(HamiltonianGraph.from_edges(3, [(1, 2, 1.0)]))


class TestGMin:
    def test_tight_binding(self):
        for d in (2, 4, 6):
            assert g_min(tight_binding(d)) == pytest.approx(
                1.0 / np.sqrt(2 * (d - 1)), abs=1e-15
            )

    def test_uniform_weights_in_range(self, rng):
        g = random_weights(enumerate_connected_graphs(5)[7], 1.0, 2.0, seed=rng)
        assert 1.0 <= g_min(g) <= 2.0

    def test_single_edge(self):
        assert g_min(HamiltonianGraph.from_edges(2, [(1, 2, 3.0)])) == 3.0

    def test_edgeless_rejected(self):
        with pytest.raises(ValueError):
            g_min(HamiltonianGraph(dim=3, edges=()))


def brute_force_isomorphic(a: HamiltonianGraph, b: HamiltonianGraph) -> bool:
    if a.dim != b.dim or len(a.edges) != len(b.edges):
        return False
    ea = {(n, m) for n, m, _ in a.edges}
    eb = {(n, m) for n, m, _ in b.edges}
    for perm in itertools.permutations(range(1, a.dim + 1)):
        mapped = {tuple(sorted((perm[n - 1], perm[m - 1]))) for n, m in ea}
        if mapped == eb:
            return True
    return False


class TestEnumeration:
    @pytest.mark.parametrize("d,count", sorted(CONNECTED_COUNTS.items()))
    def test_counts(self, d, count):
        assert len(enumerate_connected_graphs(d)) == count

    def test_all_connected_unit_weights(self):
        for d in (2, 3, 4, 5):
            for g in enumerate_connected_graphs(d):
                assert is_connected(g)
                assert all(w == 1 for _, _, w in g.edges)

    def test_pairwise_non_isomorphic(self):
        for d in (3, 4, 5):
            graphs = enumerate_connected_graphs(d)
            for i in range(len(graphs)):
                for j in range(i + 1, len(graphs)):
                    assert not brute_force_isomorphic(graphs[i], graphs[j])

    def test_deterministic_order(self):
        first = enumerate_connected_graphs(5)
        second = enumerate_connected_graphs(5)
        assert [g.edges for g in first] == [g.edges for g in second]
        masks = [canonical_form(g) for g in first]
        assert masks == sorted(masks)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            enumerate_connected_graphs(1)
        with pytest.raises(ValueError):
            enumerate_connected_graphs(8)


class TestRandomWeights:
    def test_deterministic_under_seed(self):
        base = enumerate_connected_graphs(4)[2]
        a = random_weights(base, seed=123)
        b = random_weights(base, seed=123)
        assert a == b

    def test_law_of_large_numbers(self):
        base = HamiltonianGraph.from_edges(2, [(1, 2, 1.0)])
        r = np.random.default_rng(7)
        samples = [abs(random_weights(base, seed=r).edges[0][2]) for _ in range(10000)]
        assert 1.45 <= np.mean(samples) <= 1.55

    def test_degenerate_interval(self):
        base = enumerate_connected_graphs(3)[1]
        g = random_weights(base, 1.0, 1.0, seed=0)
        assert all(abs(w) == pytest.approx(1.0) for _, _, w in g.edges)

    def test_nonpositive_low_rejected(self):
        with pytest.raises(ValueError):
            random_weights(tight_binding(3), low=0.0, high=1.0, seed=0)

    def test_phases_preserved(self):
        base = HamiltonianGraph.from_edges(2, [(1, 2, 1j)])
        g = random_weights(base, seed=5)
        w = g.edges[0][2]
        assert w.real == pytest.approx(0.0, abs=1e-12)
        assert w.imag > 0


class TestTightBinding:
    def test_d2(self):
        g = tight_binding(2)
        assert len(g.edges) == 1
        assert abs(g.edges[0][2]) == pytest.approx(1 / np.sqrt(2), abs=1e-15)

    def test_d5_edge_count_and_weight(self):
        g = tight_binding(5)
        assert len(g.edges) == 4
        assert all(
            abs(w) == pytest.approx(1 / np.sqrt(8), abs=1e-15) for _, _, w in g.edges
        )

    def test_coupling_helper(self):
        assert tight_binding_coupling(3) == pytest.approx(0.5)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            tight_binding(1)
