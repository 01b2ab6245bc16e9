import numpy as np
import pytest

from src.families.exp_poly import ExpPolyParams, FamilyShape, summand_jet
from src.families.wronskian import (WronskianTable, frobenius_residual, nearest_zero, subset_mask, wronskian,
                                    wronskian_center_verdict, wronskian_degree_check, wronskian_table)
from src.series.jet import Jet, jet_exp
from src.utils.errors import CenterSetError, FrobeniusError, TruncationError


def exponential(a: complex, order: int = 20) -> Jet:
    return jet_exp(a * Jet.variable(order))


def assert_close(a: Jet, b: Jet, rel: float = 1e-12):
    scale = max(a.scale(), b.scale(), 1e-300)
    assert a.trunc_order == b.trunc_order
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= rel * scale


def separated_exponentials(m: int, seed: int) -> ExpPolyParams:
    """c_k e^{d_k z} with d_k spread around a circle so every nested Wronskian is a unit at 0"""
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * np.arange(m) / m + rng.uniform(0, 2 * np.pi)
    d = 0.8 * np.exp(1j * angles)
    c = rng.uniform(0.5, 1.0, m) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
    return ExpPolyParams.from_polynomials([[ck] for ck in c], [[dk] for dk in d])


class TestWronskian:
    def test_single_jet(self):
        f = Jet([1, 2, 3, 4])
        assert np.array_equal(wronskian([f]).coeffs, f.coeffs)

    def test_one_and_z(self):
        w = wronskian([Jet.constant(1.0, 8), Jet.variable(8)])
        assert w.trunc_order == 7
        assert list(w.coeffs) == [1, 0, 0, 0, 0, 0, 0, 0]

    def test_two_exponentials(self):
        a, b = 0.5, -1.5 + 0.25j
        expected = (b - a) * exponential(a + b, 19)
        assert_close(wronskian([exponential(a), exponential(b)]), expected)

    def test_dependent_pair_vanishes(self):
        f = exponential(0.7)
        assert wronskian([f, 3.0 * f]).scale() <= 1e-14

    def test_truncation_too_short(self):
        with pytest.raises(TruncationError):
            wronskian([Jet([1, 1])] * 3)

    def test_empty(self):
        with pytest.raises(ValueError):
            wronskian([])

    def test_alternating(self, rng):
        params = ExpPolyParams.random(FamilyShape(3, 1, 2), rng)
        f0, f1, f2 = (summand_jet(params, k, 16) for k in range(3))
        assert_close(wronskian([f1, f0, f2]), -wronskian([f0, f1, f2]))

    def test_multilinear(self, rng):
        params = ExpPolyParams.random(FamilyShape(3, 2, 1), rng)
        f, g, h = (summand_jet(params, k, 16) for k in range(3))
        a, b = 0.3 - 0.2j, -1.1
        lhs = wronskian([a * f + b * g, h])
        rhs = a * wronskian([f, h]) + b * wronskian([g, h])
        assert_close(lhs, rhs)

    def test_common_factor(self, rng):
        params = ExpPolyParams.random(FamilyShape(3, 1, 2), rng)
        f, g, phi = (summand_jet(params, k, 16) for k in range(3))
        lhs = wronskian([phi * f, phi * g])
        rhs = (phi * phi).truncate(15) * wronskian([f, g])
        assert_close(lhs, rhs, 1e-10)


class TestTable:
    def test_exp_minus_linear(self, exp_minus_linear, tol):
        table = wronskian_table(exp_minus_linear, 24, tol)
        assert table.entry({0}) == 0
        assert table.entry({1}) == 0
        assert table.full_order() == 1
        assert table.rolle_bound() == 2
        assert table.to_json() == {'1': 0, '2': 0, '3': 1}

    def test_center_sentinel(self, center_pair, tol):
        table = wronskian_table(center_pair, 16, tol)
        assert table.full_order() is None
        assert table.to_json()['3'] == -1
        assert table.rolle_bound() == 0

    def test_json_round_trip(self, rng, tol):
        params = ExpPolyParams.random(FamilyShape(3, 1, 1), rng)
        table = wronskian_table(params, 24, tol)
        rebuilt = WronskianTable.from_json(params.shape, table.to_json())
        assert rebuilt.entries == table.entries

    def test_every_subset_present(self, rng, tol):
        table = wronskian_table(ExpPolyParams.random(FamilyShape(3, 0, 2), rng), 16, tol)
        assert sorted(subset_mask(subset) for subset in table.entries) == list(range(1, 8))


class TestDegreeCheck:
    def test_exp_minus_linear(self, exp_minus_linear, tol):
        report = wronskian_degree_check(exp_minus_linear, 24, tol)
        assert report.lhs == 1
        assert report.rhs == 2
        assert report.satisfied

    def test_center_rejected(self, center_pair, tol):
        with pytest.raises(CenterSetError):
            wronskian_degree_check(center_pair, 16, tol)

    def test_center_verdict(self, center_pair, exp_minus_linear, tol):
        assert wronskian_center_verdict(center_pair, 16, tol).in_center
        assert not wronskian_center_verdict(exp_minus_linear, 16, tol).in_center

    @pytest.mark.parametrize("seed", range(10))
    def test_random_samples(self, seed, tol):
        params = ExpPolyParams.random(FamilyShape(2, 1, 2), np.random.default_rng(seed))
        assert wronskian_degree_check(params, 32, tol).satisfied


class TestFrobenius:
    def test_stages_for_exp_minus_linear(self, exp_minus_linear, tol):
        jets = [summand_jet(exp_minus_linear, k, 24) for k in range(2)]
        report = frobenius_residual(jets, jets[0] + jets[1], tol)
        order = report.stages[0].trunc_order
        expected_first = 1 - (1 + Jet.variable(order)) * exponential(-1.0, order)
        assert_close(report.stages[0], expected_first)
        expected_second = Jet.variable(order - 1) * exponential(-1.0, order - 1)
        assert_close(report.stages[1], expected_second)
        assert np.allclose(report.stages[2].coeffs[0], 1.0)
        assert np.max(np.abs(report.stages[2].coeffs[1:])) <= 1e-10
        assert report.orders_lost == [0, 1, 0]
        assert report.relative_residual <= 1e-10

    def test_outside_span(self, tol):
        jets = [exponential(1.0), exponential(-1.0)]
        report = frobenius_residual(jets, exponential(0.5), tol)
        assert report.relative_residual > 1e-3

    @pytest.mark.parametrize("seed", range(8))
    def test_annihilates_span(self, seed, tol):
        params = separated_exponentials(3, seed)
        jets = [summand_jet(params, k, 20) for k in range(3)]
        weights = [float(w) for w in np.random.default_rng(seed + 100).uniform(-1, 1, 3)]
        g = weights[0] * jets[0] + weights[1] * jets[1] + weights[2] * jets[2]
        assert frobenius_residual(jets, g, tol).relative_residual <= 1e-8

    def test_dependent_family(self, tol):
        f = exponential(1.0)
        with pytest.raises(FrobeniusError):
            frobenius_residual([f, -1.0 * f], f, tol)

    def test_report_json(self, exp_minus_linear, tol):
        jets = [summand_jet(exp_minus_linear, k, 12) for k in range(2)]
        payload = frobenius_residual(jets, jets[0] + jets[1], tol).to_dict()
        assert payload['orders_lost'] == [0, 1, 0]
        assert len(payload['stages']) == 5

    def test_weight_radius_without_zeros(self, exp_minus_linear, tol):
        jets = [summand_jet(exp_minus_linear, k, 24) for k in range(2)]
        assert frobenius_residual(jets, jets[0] + jets[1], tol).weight_radius == 1.0

    def test_weight_radius_follows_nearest_zero(self, tol):
        # f_1 = (z - 0.3) e^z puts a pole of the first quotient at 0.3
        params = ExpPolyParams.from_polynomials([[-0.3, 1], [1]], [[1], [-1]])
        jets = [summand_jet(params, k, 64) for k in range(2)]
        report = frobenius_residual(jets, jets[0] - 2.0 * jets[1], tol)
        assert report.weight_radius <= 0.15 + 1e-9
        assert report.relative_residual <= 1e-7

    @pytest.mark.slow
    def test_annihilates_random_tuples(self, tol):
        shapes = [FamilyShape(m, p, q) for m in (1, 2, 3) for p in (0, 1, 2) for q in (1, 2)]
        for index in range(50):
            shape = shapes[index % len(shapes)]
            params = ExpPolyParams.random(shape, np.random.default_rng([2024, index]))
            jets = [summand_jet(params, k, 64) for k in range(shape.m)]
            g = jets[0]
            for jet in jets[1:]:
                g = g + jet
            report = frobenius_residual(jets, g, tol)
            assert report.relative_residual <= 1e-7, (index, shape)


class TestNearestZero:
    def test_skips_origin(self):
        # z (z - 0.5) (z + 2) = -z + 1.5 z^2 + z^3
        assert nearest_zero(Jet([0, -1, 1.5, 1, 0, 0])) == pytest.approx(0.5)

    def test_zero_free(self):
        assert nearest_zero(Jet.constant(2.0, 6)) == np.inf
        assert nearest_zero(exponential(1.0, 16)) > 3.0
