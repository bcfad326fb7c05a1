import json
import math

import numpy as np
import pytest
from hypothesis import given

from densitymetrics import (
    AlgebraShape,
    DegenerateInputError,
    DensityElement,
    DomainError,
    Element,
    ShapeMismatchError,
    Trace,
    check_positive,
    cstar_distance,
    cstar_norm,
    density_from_vector,
    normalize_to_density,
    sample_density,
    tau_norm,
    trace_eval,
)

from conftest import SHAPES, seeds, shapes, traces


class TestShape:
    def test_dimension_is_sum_of_squares(self):
        assert AlgebraShape((2, 1, 3)).dimension == 4 + 1 + 9

    @pytest.mark.parametrize("dims", [(), (0,), (2, -1)])
    def test_rejects_bad_dims(self, dims):
        with pytest.raises(ValueError):
            AlgebraShape(dims)

    def test_commutative(self):
        s = AlgebraShape.commutative(3)
        assert s.block_dims == (1, 1, 1) and s.is_commutative
        assert not AlgebraShape((2,)).is_commutative


class TestElementOps:
    def test_unit_law(self, rng):
        a = Element.random((2, 1), rng)
        one = Element.identity((2, 1))
        assert (a @ one).allclose(a) and (one @ a).allclose(a)

    def test_adjoint_reverses_products(self, rng):
        a, b = Element.random((3, 2), rng), Element.random((3, 2), rng)
        assert (a @ b).adjoint().allclose(b.adjoint() @ a.adjoint(), atol=1e-12)

    def test_orthogonal_idempotents(self):
        e1 = Element.from_vector([1, 0])
        e2 = Element.from_vector([0, 1])
        assert (e1 @ e2) == Element.zeros((1, 1))

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatchError):
            Element.random((2,), rng) + Element.random((1, 1), rng)
        with pytest.raises(ShapeMismatchError):
            Element((2,), [np.eye(3)])

    def test_immutable(self, rng):
        a = Element.random((2,), rng)
        with pytest.raises(ValueError):
            a.blocks[0][0, 0] = 1.0
        with pytest.raises(AttributeError):
            a.shape = AlgebraShape((3,))

    def test_scalar_arithmetic(self, rng):
        a = Element.random((2, 1), rng)
        assert (a * 2 - a).allclose(a)
        assert (a / 2 + a / 2).allclose(a)
        assert (-a + a) == Element.zeros((2, 1))

    @given(shapes, seeds)
    def test_json_round_trip(self, shape, seed):
        a = Element.random(shape, np.random.default_rng(seed))
        back = Element.from_json(a.to_json())
        assert back.shape == a.shape
        assert all(np.array_equal(x, y) for x, y in zip(a.blocks, back.blocks))

    def test_json_layout(self):
        a = Element((1, 1), [[[1 + 2j]], [[3]]])
        data = json.loads(a.to_json())
        assert data["shape"] == [1, 1]
        assert data["blocks"][0] == [[[1.0, 2.0]]]


class TestNorms:
    def test_unit_norm(self):
        assert cstar_norm(Element.identity((2, 3))) == pytest.approx(1.0)

    def test_diagonal_norm(self):
        assert cstar_norm(Element((2,), [np.diag([3.0, -4.0])])) == pytest.approx(4.0)

    @pytest.mark.parametrize("dims", [(2,), (3,), (1, 1), (1, 1, 1), (2, 1)])
    def test_cstar_identity(self, dims):
        rng = np.random.default_rng(sum(dims))
        for _ in range(1000):
            a = Element.random(dims, rng)
            n = cstar_norm(a)
            assert abs(cstar_norm(a.adjoint() @ a) - n * n) <= 1e-10 * n * n

    def test_c2_distance(self, c2):
        x = density_from_vector(c2, [1, 0])
        y = density_from_vector(c2, [0, 1])
        assert cstar_distance(x.element, y.element) == pytest.approx(1.0)
        assert cstar_distance(x.element, x.element) == 0.0

    @given(seeds)
    def test_c2_distance_is_coordinate_gap(self, seed):
        tau = Trace.unit((1, 1))
        x, y = sample_density(tau, seed), sample_density(tau, seed + 1)
        gap = abs(x.diagonal()[0] - y.diagonal()[0])
        assert cstar_distance(x.element, y.element) == pytest.approx(gap, abs=1e-14)

    def test_tau_norm(self, c2):
        assert tau_norm(c2, Element.identity((1, 1))) == pytest.approx(math.sqrt(2))
        assert tau_norm(c2, Element.zeros((1, 1))) == 0.0

    @given(traces(), seeds)
    def test_tau_norm_squared(self, tau, seed):
        a = Element.random(tau.shape, np.random.default_rng(seed))
        assert tau_norm(tau, a) ** 2 == pytest.approx(tau(a.adjoint() @ a).real, rel=1e-12)


class TestTrace:
    def test_sum_trace(self, c2):
        assert trace_eval(c2, Element.from_vector([1, 0])) == 1

    def test_unit_weights_give_dimension(self):
        assert trace_eval(Trace.unit((4,)), Element.identity((4,))).real == pytest.approx(4)

    @pytest.mark.parametrize("weights", [(0.0, 1.0), (-1.0, 1.0), (1.0,)])
    def test_rejects_bad_weights(self, weights):
        with pytest.raises(ValueError):
            Trace(AlgebraShape((1, 1)), weights)

    @given(traces(), seeds)
    def test_tracial_property(self, tau, seed):
        rng = np.random.default_rng(seed)
        a, b = Element.random(tau.shape, rng), Element.random(tau.shape, rng)
        ab, ba = tau(a @ b), tau(b @ a)
        assert abs(ab - ba) <= 1e-11 * max(1.0, abs(ab))

    @given(traces(), seeds)
    def test_faithful(self, tau, seed):
        a = Element.random(tau.shape, np.random.default_rng(seed))
        assert tau(a.adjoint() @ a).real > 0

    @given(traces(), seeds)
    def test_linear(self, tau, seed):
        rng = np.random.default_rng(seed)
        a, b = Element.random(tau.shape, rng), Element.random(tau.shape, rng)
        alpha = 2.5 - 1.5j
        lhs, rhs = tau(a * alpha + b), alpha * tau(a) + tau(b)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))

    def test_json_round_trip(self):
        tau = Trace(AlgebraShape((2, 1)), (0.3, 1.7))
        assert Trace.from_json(tau.to_json()) == tau

    def test_trace_shape_mismatch(self, c2):
        with pytest.raises(ShapeMismatchError):
            c2(Element.identity((2,)))


class TestPositivity:
    def test_unit(self):
        cert = check_positive(Element.identity((2, 1)))
        assert cert and cert.min_eigenvalue == pytest.approx(1.0)

    def test_negative(self):
        cert = check_positive(Element((2,), [np.diag([1.0, -0.5])]))
        assert not cert and cert.min_eigenvalue == pytest.approx(-0.5)

    def test_gram_is_positive(self, rng):
        for dims in SHAPES:
            b = Element.random(dims, rng)
            assert check_positive(b.adjoint() @ b)

    def test_non_hermitian_is_not_positive(self):
        assert not check_positive(Element((2,), [[[1, 1], [0, 1]]]))


class TestDensity:
    def test_normalize_unit(self, c2):
        x = normalize_to_density(c2, Element.identity((1, 1)))
        assert np.allclose(x.diagonal(), [0.5, 0.5])

    def test_normalize_vector(self, c2):
        assert np.allclose(density_from_vector(c2, [2, 0]).diagonal(), [1, 0])

    def test_negative_input_carries_certificate(self):
        with pytest.raises(DomainError) as info:
            normalize_to_density(Trace.unit((2,)), Element((2,), [np.diag([1.0, -0.5])]))
        assert info.value.certificate == pytest.approx(-0.5)

    def test_zero_trace(self, c2):
        with pytest.raises(DegenerateInputError):
            normalize_to_density(c2, Element.zeros((1, 1)))

    def test_tiny_negative_eigenvalue_is_clamped(self):
        a = Element((2,), [np.diag([1.0, -1e-13])])
        x = normalize_to_density(Trace.unit((2,)), a)
        assert x.blocks[0][1, 1].real == 0.0

    def test_density_element_checks_trace(self, c2):
        with pytest.raises(ValueError):
            DensityElement(Element.from_vector([1, 1]), c2)

    @given(traces(), seeds)
    def test_sample_invariants(self, tau, seed):
        x = sample_density(tau, seed)
        assert abs(tau(x.element) - 1) <= 1e-12
        assert check_positive(x.element, 1e-10)
        assert cstar_norm(x.element) <= tau.norm_bound + 1e-10

    def test_sample_deterministic(self):
        tau = Trace.unit((2, 1))
        a, b = sample_density(tau, 7), sample_density(tau, 7)
        assert a.element == b.element
        assert not sample_density(tau, 8).element.allclose(a.element)

    def test_boundedness_on_m3(self):
        tau = Trace.unit((3,))
        assert max(cstar_norm(sample_density(tau, s).element) for s in range(1000)) <= 1.0 + 1e-10

    def test_boundedness_with_weights(self):
        tau = Trace(AlgebraShape((2, 1)), (0.25, 4.0))
        for s in range(200):
            assert cstar_norm(sample_density(tau, s).element) <= tau.norm_bound + 1e-10
