import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from gatetime.graphs import tight_binding, to_matrix
from gatetime.linalg import (
    DiagonalPhases,
    MatrixShapeError,
    NotHermitianError,
    commutator,
    edge_operator,
    gate_error,
    hs_norm,
    mat_exp,
    random_hermitian,
    random_unitary,
    two_level_rotation,
)


def hermitian(seed, d=4):
    return random_hermitian(d, np.random.default_rng(seed))


class TestMatExp:
    def test_zero_scale_is_identity(self, rng):
        a = random_hermitian(5, rng)
        np.testing.assert_array_equal(mat_exp(a, 0.0), np.eye(5))

    def test_pauli_x_quarter_period(self):
        # exp(-i (pi/2) X) = -iX
        b = edge_operator(2, 1, 2)
        expect = np.array([[0, -1j], [-1j, 0]])
        np.testing.assert_allclose(mat_exp(b, np.pi / 2), expect, atol=1e-14)

    def test_matches_scaling_and_squaring_oracle(self, rng):
        # scipy expm uses Pade scaling-and-squaring, an independent route
        a = random_hermitian(4, rng)
        np.testing.assert_allclose(
            mat_exp(a, 1.0), scipy.linalg.expm(-1j * a), atol=1e-10
        )

    def test_result_is_unitary(self, rng):
        for d in (2, 3, 6):
            u = mat_exp(random_hermitian(d, rng), 2.7)
            assert hs_norm(u.conj().T @ u - np.eye(d)) <= 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            mat_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)

    @given(
        seed=st.integers(0, 2**32 - 1),
        t=st.floats(-5, 5),
        s=st.floats(-5, 5),
    )
    def test_additive_in_scale(self, seed, t, s):
        a = hermitian(seed)
        lhs = mat_exp(a, t) @ mat_exp(a, s)
        assert hs_norm(lhs - mat_exp(a, t + s)) <= 1e-9


class TestHsNorm:
    def test_identity(self):
        for d in (1, 2, 7):
            assert hs_norm(np.eye(d)) == pytest.approx(np.sqrt(d), abs=1e-12)

    def test_tight_binding_drift_is_normalized(self):
        for d in (2, 3, 5, 8):
            assert hs_norm(to_matrix(tight_binding(d))) == pytest.approx(1.0, abs=1e-12)

    def test_entrywise_oracle(self, rng):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        direct = np.sqrt(sum(abs(a[i, j]) ** 2 for i in range(5) for j in range(5)))
        assert hs_norm(a) == pytest.approx(direct, abs=1e-12)

    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
    def test_unitary_invariance_witness(self, seed, d):
        u = random_unitary(d, np.random.default_rng(seed))
        assert abs(hs_norm(u) - np.sqrt(d)) <= 1e-10


class TestCommutator:
    def test_self_commutator_vanishes(self, rng):
        a = random_hermitian(4, rng)
        np.testing.assert_allclose(commutator(a, a), 0, atol=1e-12)

    def test_identity_commutes(self, rng):
        a = random_hermitian(3, rng)
        np.testing.assert_allclose(commutator(a, np.eye(3)), 0, atol=1e-14)

    def test_hand_checked_two_by_two(self):
        b = edge_operator(2, 1, 2)
        z = np.diag([1.0, -1.0]).astype(complex)
        expect = 2.0 * np.array([[0.0, -1.0], [1.0, 0.0]])
        np.testing.assert_allclose(commutator(b, z), expect, atol=1e-15)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(MatrixShapeError):
            commutator(np.eye(2), np.eye(3))


class TestGateError:
    def test_equal_unitaries(self, rng):
        u = random_unitary(4, rng)
        assert gate_error(u, u) == pytest.approx(0.0, abs=1e-14)

    def test_global_phase_invariance(self, rng):
        u = random_unitary(3, rng)
        for phi in (0.3, -2.0, np.pi):
            assert gate_error(u, np.exp(1j * phi) * u) == pytest.approx(0.0, abs=1e-13)

    def test_traceless_case_is_one(self):
        x = edge_operator(2, 1, 2)
        assert gate_error(np.eye(2), x) == pytest.approx(1.0, abs=1e-15)

    def test_range(self, rng):
        for _ in range(20):
            e = gate_error(random_unitary(3, rng), random_unitary(3, rng))
            assert 0.0 <= e <= 1.0

    @given(seed=st.integers(0, 2**32 - 1))
    def test_symmetric(self, seed):
        r = np.random.default_rng(seed)
        u, v = random_unitary(4, r), random_unitary(4, r)
        assert abs(gate_error(u, v) - gate_error(v, u)) <= 1e-12


def test_two_level_rotation_matches_mat_exp(rng):
    for _ in range(5):
        alpha = rng.uniform(-np.pi, np.pi)
        direct = two_level_rotation(5, 2, 4, alpha)
        via_exp = mat_exp(edge_operator(5, 2, 4), alpha)
        np.testing.assert_allclose(direct, via_exp, atol=1e-12)


def test_diagonal_phases_matrix():
    ph = DiagonalPhases(thetas=(0.0, np.pi / 2, np.pi))
    v = ph.matrix()
    np.testing.assert_allclose(np.diag(v), [1.0, 1j, -1.0], atol=1e-15)
    assert DiagonalPhases.zero(3).is_trivial()
    assert not ph.is_trivial()
