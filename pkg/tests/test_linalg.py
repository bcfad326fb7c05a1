import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from densitymetrics import (
    DomainError,
    Element,
    cstar_distance,
    cstar_norm,
    check_positive,
    hermitian_eig,
    jacobi_svd,
    matrix_abs,
    matrix_function,
    matrix_sqrt,
)
from densitymetrics.calculus import polar_unitary, trace_abs

from conftest import seeds, shapes


def random_hermitian(n, rng, scale=1.0):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (m + m.conj().T) / 2


class TestHermitianEig:
    def test_identity(self):
        eig = hermitian_eig(np.eye(2))
        assert np.allclose(eig.eigenvalues, [1, 1])

    def test_diagonal_sorted(self):
        eig = hermitian_eig(np.diag([3.0, 1.0]))
        assert np.allclose(eig.eigenvalues, [1, 3])
        assert np.allclose(np.abs(eig.eigenvectors), [[0, 1], [1, 0]])

    def test_two_by_two(self):
        assert np.allclose(hermitian_eig([[2, 1], [1, 2]]).eigenvalues, [1, 3])

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError) as info:
            hermitian_eig([[1, 2], [0, 1]])
        assert info.value.certificate > 1

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            hermitian_eig(np.ones((2, 3)))

    def test_does_not_modify_input(self):
        m = random_hermitian(3, np.random.default_rng(0))
        before = m.copy()
        hermitian_eig(m)
        assert np.array_equal(m, before)

    @given(st.integers(1, 8), seeds, st.sampled_from([1e-6, 1.0, 1e6]))
    def test_invariants(self, n, seed, scale):
        m = random_hermitian(n, np.random.default_rng(seed), scale)
        eig = hermitian_eig(m)
        bound = 1e-10 * max(1.0, np.linalg.norm(m, 2))
        assert eig.residuals(m).max() <= bound
        assert eig.unitarity_defect() <= 1e-10
        assert np.all(np.diff(eig.eigenvalues) >= 0)

    @given(st.integers(1, 8), seeds)
    def test_matches_lapack(self, n, seed):
        m = random_hermitian(n, np.random.default_rng(seed))
        assert np.allclose(hermitian_eig(m).eigenvalues, np.linalg.eigvalsh(m), atol=1e-12)

    def test_large_block_path(self):
        m = random_hermitian(20, np.random.default_rng(3))
        eig = hermitian_eig(m)
        assert eig.residuals(m).max() <= 1e-10 * np.linalg.norm(m, 2)
        assert np.allclose(eig.eigenvalues, np.linalg.eigvalsh(m), atol=1e-11)

    def test_degenerate_spectrum(self):
        rng = np.random.default_rng(4)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        m = (q * np.array([1.0, 1.0, 2.0, 2.0])) @ q.conj().T
        eig = hermitian_eig(m)
        assert np.allclose(eig.eigenvalues, [1, 1, 2, 2], atol=1e-13)
        assert eig.unitarity_defect() <= 1e-12


class TestSvd:
    @given(st.integers(1, 6), seeds)
    def test_matches_lapack(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        s = np.sort(jacobi_svd(m).singular_values)[::-1]
        assert np.allclose(s, np.linalg.svd(m, compute_uv=False), atol=1e-12)

    def test_small_singular_values_keep_absolute_accuracy(self):
        m = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-12]])
        s = np.sort(jacobi_svd(m).singular_values)
        assert s[0] == pytest.approx(np.linalg.svd(m, compute_uv=False)[-1], abs=1e-15)

    @given(st.integers(2, 5), seeds)
    def test_trace_abs(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert trace_abs(m) == pytest.approx(np.linalg.svd(m, compute_uv=False).sum(), rel=1e-13)

    @given(st.integers(2, 4), seeds, st.booleans())
    def test_polar_factor(self, n, seed, singular):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if singular:
            m[:, -1] = 0.0
        w, total = polar_unitary(m)
        assert np.allclose(w.conj().T @ w, np.eye(n), atol=1e-12)
        absm = w.conj().T @ m
        assert np.allclose(absm, absm.conj().T, atol=1e-12)
        assert np.trace(absm).real == pytest.approx(total, rel=1e-12)
        assert trace_abs(m) == pytest.approx(total, rel=1e-12, abs=1e-14)


class TestFunctionalCalculus:
    def test_sqrt_of_unit(self):
        one = Element.identity((2, 1))
        assert matrix_sqrt(one).allclose(one)

    def test_sqrt_of_diagonal(self):
        a = Element((2,), [np.diag([4.0, 9.0])])
        assert matrix_sqrt(a).allclose(Element((2,), [np.diag([2.0, 3.0])]))

    @given(shapes, seeds)
    def test_sqrt_round_trip(self, shape, seed):
        b = Element.random(shape, np.random.default_rng(seed))
        a = b.adjoint() @ b
        root = matrix_sqrt(a)
        assert check_positive(root)
        assert cstar_distance(root @ root, a) <= 1e-10 * max(1.0, cstar_norm(a))

    def test_domain_error(self):
        with pytest.raises(DomainError):
            matrix_sqrt(Element((2,), [np.diag([1.0, -0.1])]))

    def test_tiny_negative_is_clamped(self):
        root = matrix_sqrt(Element((2,), [np.diag([1.0, -1e-14])]))
        assert root.blocks[0][1, 1] == 0

    def test_custom_function_and_domain(self):
        a = Element((2,), [[[2, 1], [1, 2]]])
        exp_a = matrix_function(a, np.exp)
        eig = hermitian_eig(exp_a.blocks[0])
        assert np.allclose(eig.eigenvalues, np.exp([1, 3]))
        with pytest.raises(DomainError):
            matrix_function(a, np.log, (2.0, math.inf))

    def test_scalar_only_function(self):
        a = Element((2,), [np.diag([0.25, 1.0])])
        out = matrix_function(a, lambda t: math.sqrt(t), (0.0, math.inf))
        assert out.allclose(Element((2,), [np.diag([0.5, 1.0])]))

    def test_sqrt_is_half_holder(self):
        # ||sqrt(x + h/k) - sqrt(x)|| <= C sqrt(||h/k||), with C measured on the family
        rng = np.random.default_rng(11)
        b = Element.random((3,), rng)
        x = b.adjoint() @ b
        h = Element.random_hermitian((3,), rng)
        h = h * (1.0 / cstar_norm(h))
        root = matrix_sqrt(x)
        ratios = []
        for k in [2**j for j in range(1, 30)]:
            step = h * (1.0 / k)
            xk = x + step
            if not check_positive(xk):
                continue
            ratios.append(cstar_distance(matrix_sqrt(xk), root) / math.sqrt(cstar_norm(step)))
        assert ratios and max(ratios) < 10.0

    def test_sqrt_continuity_at_singular_point(self):
        # sqrt is only 1/2-Holder at 0: the worst case is a rank-deficient base point
        x = Element((2,), [np.diag([1.0, 0.0])])
        for k in [10, 1000, 10**6]:
            xk = x + Element((2,), [np.diag([0.0, 1.0 / k])])
            gap = cstar_distance(matrix_sqrt(xk), matrix_sqrt(x))
            assert gap == pytest.approx(math.sqrt(1.0 / k), rel=1e-9)


class TestAbs:
    def test_diagonal(self):
        a = Element((2,), [np.diag([-2.0, 3.0])])
        assert matrix_abs(a).allclose(Element((2,), [np.diag([2.0, 3.0])]))

    def test_unitary(self):
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        assert matrix_abs(Element((3,), [q])).allclose(Element.identity((3,)), atol=1e-12)

    def test_orthogonal_roots_vanish(self):
        x, y = Element.from_vector([1, 0]), Element.from_vector([0, 1])
        out = matrix_abs(matrix_sqrt(x) @ matrix_sqrt(y))
        assert out == Element.zeros((1, 1))

    @given(shapes, seeds)
    def test_invariants(self, shape, seed):
        rng = np.random.default_rng(seed)
        a = Element.random(shape, rng)
        absa = matrix_abs(a)
        assert check_positive(absa)
        assert cstar_norm(absa) == pytest.approx(cstar_norm(a), rel=1e-10)
        assert cstar_distance(absa @ absa, a.adjoint() @ a) <= 1e-10 * max(1.0, cstar_norm(a) ** 2)
        p = a.adjoint() @ a
        assert cstar_distance(matrix_abs(p), p) <= 1e-10 * max(1.0, cstar_norm(p))
