import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad_vec
from scipy.linalg import expm

from chanholo.errors import EmptyPath, NonMonotoneGrid, NotAntiHermitian, NotPositive, RankDeficient, ZeroInput
from chanholo.matcore import (
    dag,
    haar_unitary,
    is_hermitian,
    is_positive_definite,
    matrix_sqrt_posdef,
    partial_trace,
    path_ordered_exponential,
    path_ordered_exponential_fn,
    phi,
    polar_phase,
    polar_unitary,
    rank_estimate,
    solve_gauge_equation,
)

from conftest import random_matrix, seeds

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def eig_polar_oracle(x):
    """(X X^dag)^{-1/2} X through an eigendecomposition of X X^dag."""
    w, v = np.linalg.eigh(x @ dag(x))
    return (v / np.sqrt(w)) @ dag(v) @ x


class TestPolar:
    def test_identity(self):
        assert np.allclose(phi(np.eye(2)), np.eye(2))

    def test_positive_definite_gives_identity(self):
        assert np.allclose(phi(np.diag([2.0, 0.5])), np.eye(2), atol=1e-14)

    def test_real_diagonal_sign(self):
        assert np.allclose(phi(np.diag([3.0, -2.0])), np.diag([1.0, -1.0]))

    @given(seeds, st.integers(1, 5))
    def test_matches_eigendecomposition_oracle(self, seed, n):
        x = random_matrix(np.random.default_rng(seed), n)
        res = polar_unitary(x)
        assert np.allclose(res.unitary, eig_polar_oracle(x), atol=1e-9)
        assert np.allclose(dag(res.unitary) @ res.unitary, np.eye(n), atol=1e-12)
        assert np.allclose(res.positive_part @ res.unitary, x, atol=1e-10)
        h = dag(res.unitary) @ x
        assert np.allclose(h, dag(h), atol=1e-10)
        assert np.linalg.eigvalsh(0.5 * (h + dag(h)))[0] > 0

    @given(seeds)
    def test_unitary_covariance(self, seed):
        rng = np.random.default_rng(seed)
        x = random_matrix(rng, 3)
        u, v = haar_unitary(3, rng), haar_unitary(3, rng)
        assert np.allclose(phi(u @ x @ v), u @ phi(x) @ v, atol=1e-10)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient) as info:
            phi(np.diag([1.0, 0.0]))
        assert info.value.smin == 0.0

    def test_zero_input(self):
        with pytest.raises((ZeroInput, RankDeficient)):
            phi(np.zeros((2, 2)))

    @pytest.mark.parametrize("z,expected", [(5, 1), (-2, -1), (np.cos(3 * np.pi / 4), -1), (1j, 1j)])
    def test_scalar_phase(self, z, expected):
        assert polar_phase(z) == pytest.approx(expected)


class TestGaugeEquation:
    def test_identity_q(self, rng):
        s = random_matrix(rng, 3)
        s = s - dag(s)
        assert np.allclose(solve_gauge_equation(np.eye(3), s), s / 2)

    def test_zero_source(self, rng):
        z = random_matrix(rng, 3)
        assert np.allclose(solve_gauge_equation(z @ dag(z) + np.eye(3), np.zeros((3, 3))), 0)

    @given(seeds, st.integers(1, 4))
    def test_residual_and_integral_oracle(self, seed, n):
        rng = np.random.default_rng(seed)
        z = random_matrix(rng, n)
        q = z @ dag(z) + 0.2 * np.eye(n)
        s = random_matrix(rng, n)
        s = s - dag(s)
        a = solve_gauge_equation(q, s)
        assert np.linalg.norm(a @ q + q @ a - s) < 1e-10 * np.linalg.norm(s)
        assert np.allclose(a, -dag(a), atol=1e-12)
        lam = np.linalg.eigvalsh(q)[0]
        integral, _ = quad_vec(lambda r: expm(-r * q) @ s @ expm(-r * q), 0, 50 / lam, epsabs=1e-12)
        assert np.allclose(a, integral, atol=1e-8 * max(1.0, np.linalg.norm(a)))

    def test_rejects_non_positive(self):
        with pytest.raises(NotPositive):
            solve_gauge_equation(np.diag([1.0, -1.0]), np.zeros((2, 2)))

    def test_rejects_non_antihermitian_source(self):
        with pytest.raises(NotAntiHermitian):
            solve_gauge_equation(np.eye(2), np.eye(2))


class TestPathOrdering:
    def test_zero_generator(self):
        samples = [(s, np.zeros((2, 2))) for s in np.linspace(0, 1, 5)]
        assert np.allclose(path_ordered_exponential(samples), np.eye(2))

    def test_constant_generator(self):
        a = 1j * SX + 0.3j * SZ
        samples = [(s, a) for s in np.linspace(0, 1, 7)]
        assert np.allclose(path_ordered_exponential(samples), expm(a))

    def test_later_factors_on_left(self):
        a, b = 1j * SX, 1j * SZ
        got = path_ordered_exponential_fn(lambda s: a if s < 0.5 else b, 0, 1, 2)
        assert np.allclose(got, expm(b / 2) @ expm(a / 2))
        got_right = path_ordered_exponential_fn(lambda s: a if s < 0.5 else b, 0, 1, 2, right=True)
        assert np.allclose(got_right, expm(a / 2) @ expm(b / 2))
        assert not np.allclose(got, got_right)

    def test_second_order_convergence(self):
        gen = lambda s: 1j * s * SX + 1j * SZ
        ref = path_ordered_exponential_fn(gen, 0, 1, 16000)
        e1 = np.linalg.norm(path_ordered_exponential_fn(gen, 0, 1, 2000) - ref)
        e2 = np.linalg.norm(path_ordered_exponential_fn(gen, 0, 1, 4000) - ref)
        assert 3.0 < e1 / e2 < 5.0

    def test_grid_errors(self):
        with pytest.raises(EmptyPath):
            path_ordered_exponential([])
        with pytest.raises(NonMonotoneGrid):
            path_ordered_exponential([(0.5, np.zeros((1, 1))), (0.1, np.zeros((1, 1)))])


def test_sqrt():
    assert np.allclose(matrix_sqrt_posdef(np.eye(2)), np.eye(2))
    assert np.allclose(matrix_sqrt_posdef(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_rank_of_phase_bit_overlap():
    t = np.array([[2 * np.sqrt(0.25), 0], [0, 0]])
    assert rank_estimate(t) == 1
    assert rank_estimate(np.zeros((2, 2))) == 0


def test_hermitian_and_positive():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert is_positive_definite(np.diag([1.0, 0.1]))
    assert not is_positive_definite(np.diag([1.0, -0.1]))
    assert not is_positive_definite(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds)
@settings(max_examples=30)
def test_haar_unitary_and_partial_trace(seed):
    rng = np.random.default_rng(seed)
    u = haar_unitary(4, rng)
    assert np.allclose(dag(u) @ u, np.eye(4), atol=1e-12)
    a, b = random_matrix(rng, 2), random_matrix(rng, 3)
    ab = np.kron(a, b)
    assert np.allclose(partial_trace(ab, [2, 3], [0]), a * np.trace(b))
    assert np.allclose(partial_trace(ab, [2, 3], [1]), b * np.trace(a))
