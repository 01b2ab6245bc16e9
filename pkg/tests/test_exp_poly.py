import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from src.families.exp_poly import (CenterReason, ExpPolyParams, FamilyShape, center_membership,
                                   cyclicity_bound, evaluate, evaluate_derivative, family_jet, maclaurin_coeff,
                                   psi_map, radius_normalizer, summand_jet, weighted_compositions,
                                   wronskian_degree_bound)
from src.series.jet import jet_derivative
from src.utils.errors import EvaluationOverflowError, PolynomialFamilyError, SchemaError

SHAPES = [FamilyShape(m, p, q) for m in (1, 2, 3) for p in (0, 1, 2) for q in (1, 2)]

seeds = st.integers(0, 2 ** 32 - 1)


def majorant(params: ExpPolyParams) -> ExpPolyParams:
    """Same shape with every coordinate replaced by its modulus"""
    return ExpPolyParams(params.shape, np.abs(params.c), np.abs(params.d))


class TestShape:
    def test_parameter_count(self):
        assert FamilyShape(2, 1, 3).n_params == 2 * (1 + 3 + 1)

    @pytest.mark.parametrize("m,p,q", [(0, 1, 1), (1, -1, 1), (1, 0, 0)])
    def test_invalid(self, m, p, q):
        with pytest.raises(ValueError):
            FamilyShape(m, p, q)

    def test_schema_error(self):
        with pytest.raises(SchemaError):
            FamilyShape.from_dict({'m': 1})

    def test_params_dimension_check(self):
        with pytest.raises(ValueError):
            ExpPolyParams(FamilyShape(1, 1, 1), np.zeros((1, 3)), np.zeros((1, 1)))

    def test_vector_round_trip(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 1, 2), rng)
        rebuilt = ExpPolyParams.from_vector(params.shape, params.vector())
        assert rebuilt.vector().size == params.shape.n_params
        assert np.array_equal(rebuilt.vector(), params.vector())

    def test_dict_round_trip_and_fingerprint(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 2, 1), rng)
        rebuilt = ExpPolyParams.from_dict(params.to_dict())
        assert np.array_equal(rebuilt.c, params.c)
        assert rebuilt.fingerprint() == params.fingerprint()

    def test_random_stays_in_unit_polydisk(self, rng):
        params = ExpPolyParams.random(FamilyShape(3, 2, 2), rng)
        assert np.all(np.abs(params.vector()) <= 1.0)

    def test_perturbed_stays_in_ball(self, rng, exp_minus_linear):
        for _ in range(20):
            moved = exp_minus_linear.perturbed(rng, 1e-2)
            assert np.linalg.norm(moved.vector() - exp_minus_linear.vector()) <= 1e-2 * (1 + 1e-9)


class TestEvaluate:
    def test_exp_at_zero(self):
        assert evaluate(ExpPolyParams.from_polynomials([[1]], [[1]]), 0.0) == 1

    def test_center_point_vanishes(self, center_pair):
        z = np.array([0.3, -1 + 2j, 4j])
        assert np.allclose(evaluate(center_pair, z), 0.0)

    def test_hand_value(self):
        params = ExpPolyParams.from_polynomials([[1, 1]], [[2]])
        assert evaluate(params, 1.0) == pytest.approx(2 * math.e ** 2)

    def test_overflow(self):
        params = ExpPolyParams.from_polynomials([[1]], [[1]])
        with pytest.raises(EvaluationOverflowError):
            evaluate(params, 1000.0)

    def test_derivative_matches_jet(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 2, 2), rng)
        derivative = jet_derivative(family_jet(params, 20))
        assert evaluate_derivative(params, 0.0) == pytest.approx(derivative.coeffs[0], rel=1e-12)

    def test_derivative_params(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 1, 2), rng)
        z = np.array([0.1, 0.2j, -0.3])
        assert np.allclose(evaluate(params.derivative(), z), evaluate_derivative(params, z))

    def test_product_params(self, rng):
        a = ExpPolyParams.random(FamilyShape(2, 1, 1), rng)
        b = ExpPolyParams.random(FamilyShape(1, 2, 2), rng)
        z = np.array([0.25, -0.5j, 0.1 + 0.1j])
        assert np.allclose(evaluate(a.product(b), z), evaluate(a, z) * evaluate(b, z))

    def test_recentered(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 2, 2), rng)
        w = 0.3 - 0.2j
        z = np.array([0.0, 0.1, -0.2j])
        assert np.allclose(evaluate(params.recentered(w), z), evaluate(params, z + w))


class TestJets:
    def test_constant_summand(self):
        jet = summand_jet(ExpPolyParams.from_polynomials([[1]], [[0]]), 0, 6)
        assert np.allclose(jet.coeffs, [1, 0, 0, 0, 0, 0, 0])

    def test_exponential_summand(self):
        jet = summand_jet(ExpPolyParams.from_polynomials([[1]], [[1]]), 0, 8)
        assert np.allclose(jet.coeffs, [1 / math.factorial(n) for n in range(9)])

    def test_z_exp_z2(self):
        jet = summand_jet(ExpPolyParams.from_polynomials([[0, 1]], [[0, 1]]), 0, 5)
        assert np.allclose(jet.coeffs, [0, 1, 0, 1, 0, 0.5])

    def test_summand_index_range(self, exp_minus_linear):
        with pytest.raises(IndexError):
            summand_jet(exp_minus_linear, 2, 4)

    def test_zero_parameters(self):
        assert family_jet(ExpPolyParams.zeros(FamilyShape(2, 1, 1)), 10).scale() == 0.0

    def test_exp_minus_linear(self, exp_minus_linear):
        coeffs = family_jet(exp_minus_linear, 6).coeffs
        assert np.allclose(coeffs, [0, 0, 1 / 2, 1 / 6, 1 / 24, 1 / 120, 1 / 720])

    def test_single_summand_consistency(self, rng):
        params = ExpPolyParams.random(FamilyShape(1, 2, 2), rng)
        assert np.array_equal(family_jet(params, 12).coeffs, summand_jet(params, 0, 12).coeffs)


class TestMaclaurin:
    def test_compositions(self):
        assert sorted(weighted_compositions(4, 2)) == [(0, 2), (2, 1), (4, 0)]
        assert list(weighted_compositions(3, 1)) == [(3,)]
        assert list(weighted_compositions(-1, 2)) == []

    def test_k_q_outermost(self):
        assert [parts[-1] for parts in weighted_compositions(6, 3)] == sorted(
            parts[-1] for parts in weighted_compositions(6, 3))

    def test_closed_forms(self, rng):
        params = ExpPolyParams.random(FamilyShape(3, 2, 2), rng)
        c, d = params.c, params.d
        a0 = c[:, 0].sum()
        a1 = (c[:, 1] + c[:, 0] * d[:, 0]).sum()
        a2 = (c[:, 2] + c[:, 1] * d[:, 0] + c[:, 0] * (d[:, 1] + d[:, 0] ** 2 / 2)).sum()
        assert abs(maclaurin_coeff(params, 0) - a0) <= 1e-12
        assert abs(maclaurin_coeff(params, 1) - a1) <= 1e-12
        assert abs(maclaurin_coeff(params, 2) - a2) <= 1e-12

    def test_pure_exponential(self):
        params = ExpPolyParams.from_polynomials([[1]], [[2]])
        for n in range(10):
            assert maclaurin_coeff(params, n) == pytest.approx(2 ** n / math.factorial(n), rel=1e-14)

    def test_memoized_matches(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 1, 2), rng)
        for n in range(12):
            assert maclaurin_coeff(params, n, memoize=True) == maclaurin_coeff(params, n)

    @pytest.mark.parametrize("shape", SHAPES, ids=str)
    def test_agreement_with_jets(self, shape):
        for index in range(20):
            params = ExpPolyParams.random(shape, np.random.default_rng([5, index]))
            jet = family_jet(params, 64)
            reference = family_jet(majorant(params), 64)
            for n in range(21):
                error = abs(maclaurin_coeff(params, n, memoize=True) - jet.coeffs[n])
                assert error <= 1e-9 * max(abs(reference.coeffs[n]), 1e-300)

    def test_degree_in_scaling(self, rng):
        params = ExpPolyParams.random(FamilyShape(2, 2, 2), rng)
        for n in range(8):
            t = np.linspace(-1.0, 1.0, n + 4)
            values = np.array([maclaurin_coeff(params.scaled(s), n) for s in t])
            fit = np.polynomial.polynomial.polyfit(t, values, n + 1)
            residual = np.max(np.abs(np.polynomial.polynomial.polyval(t, fit) - values))
            assert residual <= 1e-8


class TestBounds:
    @pytest.mark.parametrize("m,p,q,expected", [(1, 3, 5, 3), (2, 1, 1, 3), (3, 2, 3, 14), (2, 0, 2, 2)])
    def test_cyclicity_bound(self, m, p, q, expected):
        assert cyclicity_bound(FamilyShape(m, p, q)) == expected

    def test_wronskian_degree_bound(self):
        assert wronskian_degree_bound(FamilyShape(2, 1, 2)) == 3


class TestPsi:
    def test_fixed_point(self):
        shape = FamilyShape(2, 2, 2)
        ones = ExpPolyParams(shape, np.ones((2, 3)), np.ones((2, 2)))
        assert np.array_equal(psi_map(ones).vector(), ones.vector())

    def test_coordinate_powers(self):
        params = ExpPolyParams(FamilyShape(1, 1, 2), np.array([[1.0, 2.0]]), np.array([[1.0, 3.0]]))
        mapped = psi_map(params)
        assert mapped.c[0, 1] == 4
        assert mapped.d[0, 1] == 9

    @given(seeds)
    @settings(max_examples=100, deadline=None)
    def test_scaling_identity(self, seed):
        rng = np.random.default_rng(seed)
        params = ExpPolyParams.random(FamilyShape(2, 2, 2), rng)
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        base = psi_map(params)
        scaled = psi_map(params.scaled(z))
        for n in range(16):
            expected = z ** (n + 1) * maclaurin_coeff(base, n, memoize=True)
            reference = abs(z) ** (n + 1) * abs(maclaurin_coeff(majorant(base), n, memoize=True))
            assert abs(maclaurin_coeff(scaled, n, memoize=True) - expected) <= 1e-9 * max(reference, 1e-300)


class TestCenter:
    def test_condition_b(self, center_pair, tol):
        verdict = center_membership(center_pair, tol)
        assert verdict.in_center
        assert verdict.witness_subset == frozenset({0, 1})
        assert verdict.reason == CenterReason.STRUCTURAL

    def test_distinct_exponents(self, tol):
        params = ExpPolyParams.from_polynomials([[1], [-1]], [[1], [2]])
        assert not center_membership(params, tol).in_center
        assert maclaurin_coeff(params, 1) == pytest.approx(-1)

    def test_all_zero(self, tol):
        assert center_membership(ExpPolyParams.zeros(FamilyShape(2, 1, 1)), tol).in_center

    def test_condition_a_with_vanishing_outsider(self, tol):
        params = ExpPolyParams.from_polynomials([[1, 2], [-1, -2], [0, 0]], [[1], [1], [0.5]])
        verdict = center_membership(params, tol)
        assert verdict.in_center
        assert verdict.witness_subset == frozenset({0, 1})

    def test_two_cancelling_classes(self, tol):
        params = ExpPolyParams.from_polynomials([[1], [-1], [2], [-2]], [[1], [1], [3], [3]])
        assert center_membership(params, tol).in_center

    def test_verdict_json(self, center_pair, tol):
        assert center_membership(center_pair, tol).to_dict() == {
            'in_center': True, 'witness_subset': [0, 1], 'reason': 'structural'}

    @given(seeds)
    @settings(max_examples=50, deadline=None)
    def test_coefficient_characterization(self, seed):
        rng = np.random.default_rng(seed)
        shape = FamilyShape(2, 1, 1)
        if rng.uniform() < 0.5:
            params = ExpPolyParams.random(shape, rng)
        else:
            p = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
            q = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
            params = ExpPolyParams.from_polynomials([p, -p], [[q], [q]])
        verdict = center_membership(params)
        bound = cyclicity_bound(shape)
        coefficients = np.abs(family_jet(params, bound).coeffs)
        scale = sum(summand_jet(params, k, bound).scale() for k in range(shape.m))
        assert verdict.in_center == bool(np.all(coefficients <= 1e-10 * scale))


class TestRadiusNormalizer:
    def test_linear(self):
        assert radius_normalizer(ExpPolyParams.from_polynomials([[1]], [[1]])) == pytest.approx(1.0, rel=1e-8)

    def test_quadratic(self):
        params = ExpPolyParams.from_polynomials([[1]], [[0, 2]])
        assert radius_normalizer(params) == pytest.approx(1 / math.sqrt(2), rel=1e-8)

    def test_golden_ratio(self):
        params = ExpPolyParams.from_polynomials([[1]], [[1, 1]])
        assert radius_normalizer(params) == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-8)

    def test_largest_exponent_wins(self):
        params = ExpPolyParams.from_polynomials([[1], [1]], [[0.5], [2]])
        assert radius_normalizer(params) == pytest.approx(0.5, rel=1e-8)

    def test_polynomial_rejected(self):
        with pytest.raises(PolynomialFamilyError):
            radius_normalizer(ExpPolyParams.from_polynomials([[1, 1]], [[0]]))
