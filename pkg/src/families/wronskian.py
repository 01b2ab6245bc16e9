import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as poly

from src.families.exp_poly import (CenterReason, CenterVerdict, ExpPolyParams, FamilyShape,
                                   summand_jet, wronskian_degree_bound)
from src.series.jet import (DEFAULT_TOLERANCE, DEFAULT_TRUNCATION, Jet, OrderResult, Tolerance,
                            jet_add, jet_derivative, jet_div, jet_div_monomial, jet_mul,
                            jet_neg, jet_order, jet_sub)
from src.utils.errors import (CenterSetError, FrobeniusError, OrderDeficiencyError,
                              TruncationError)
from src.utils.reports import InequalityReport

logger = logging.getLogger(__name__)

# Trailing Taylor coefficients below this fraction of the largest are dropped before root finding.
ROOT_TRIM = 1e-15


def _laplace_det(matrix: List[List[Jet]]) -> Jet:
    """Determinant over the jet ring by cofactor expansion along the first row"""
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    if size == 2:
        return jet_sub(jet_mul(matrix[0][0], matrix[1][1]), jet_mul(matrix[0][1], matrix[1][0]))
    total: Optional[Jet] = None
    for col in range(size):
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        term = jet_mul(matrix[0][col], _laplace_det(minor))
        if col % 2:
            term = jet_neg(term)
        total = term if total is None else jet_add(total, term)
    return total


def wronskian(fs: Sequence[Jet]) -> Jet:
    """
    W(f_1, ..., f_l): determinant of the matrix whose row r holds the r-th
    derivatives. The result is l-1 orders shorter than the shortest input.
    """
    size = len(fs)
    if size < 1:
        raise ValueError("Wronskian needs at least one jet")
    out_order = min(f.trunc_order for f in fs) - (size - 1)
    if out_order < 0:
        raise TruncationError(
            f"Truncation {out_order + size - 1} too short for a {size}x{size} Wronskian"
        )
    if size > 4:
        logger.debug(f"Cofactor expansion of a {size}x{size} Wronskian")
    rows: List[List[Jet]] = []
    current = list(fs)
    for r in range(size):
        rows.append([f.truncate(out_order) for f in current])
        if r < size - 1:
            current = [jet_derivative(f) for f in current]
    return _laplace_det(rows)


def subset_mask(subset: FrozenSet[int]) -> int:
    return sum(1 << k for k in subset)


@dataclass
class WronskianTable:
    """Orders m_I of W(f_i : i in I) at 0 for every nonempty subset I"""
    shape: FamilyShape
    entries: Dict[FrozenSet[int], OrderResult] = field(default_factory=dict)

    def entry(self, subset) -> OrderResult:
        return self.entries[frozenset(subset)]

    def rolle_bound(self) -> Optional[int]:
        """max over subsets with finite order of m_I + |I| - 1"""
        finite = [order + len(subset) - 1 for subset, order in self.entries.items() if order is not None]
        return max(finite) if finite else None

    def full_order(self) -> OrderResult:
        return self.entries[frozenset(range(self.shape.m))]

    def to_json(self) -> Dict[str, int]:
        """Subset bitmask -> order, with -1 for a Wronskian that vanishes to truncation"""
        return {str(subset_mask(subset)): (-1 if order is None else order)
                for subset, order in sorted(self.entries.items(), key=lambda item: subset_mask(item[0]))}

    @classmethod
    def from_json(cls, shape: FamilyShape, payload: Dict[str, int]) -> 'WronskianTable':
        entries = {}
        for mask, order in payload.items():
            subset = frozenset(k for k in range(shape.m) if int(mask) >> k & 1)
            entries[subset] = None if order < 0 else int(order)
        return cls(shape, entries)


def wronskian_table(params: ExpPolyParams, truncation: int = DEFAULT_TRUNCATION,
                    tol: Tolerance = DEFAULT_TOLERANCE) -> WronskianTable:
    """Multiplicity at 0 of the Wronskian of every nonempty subset of summands"""
    jets = [summand_jet(params, k, truncation) for k in range(params.shape.m)]
    table = WronskianTable(params.shape)
    for size in range(1, params.shape.m + 1):
        for subset in combinations(range(params.shape.m), size):
            table.entries[frozenset(subset)] = jet_order(wronskian([jets[k] for k in subset]), tol)
    return table


def wronskian_degree_check(params: ExpPolyParams, truncation: int = DEFAULT_TRUNCATION,
                           tol: Tolerance = DEFAULT_TOLERANCE) -> InequalityReport:
    """m_{full set} <= mp + m(m-1)(q-1)/2"""
    jets = [summand_jet(params, k, truncation) for k in range(params.shape.m)]
    order = jet_order(wronskian(jets), tol)
    if order is None:
        raise CenterSetError("Full Wronskian vanishes to truncation order: the parameter is a center point")
    bound = wronskian_degree_bound(params.shape)
    return InequalityReport(
        name='wronskian_degree',
        lhs=float(order),
        rhs=float(bound),
        satisfied=order <= bound,
        details={'shape': params.shape.to_dict(), 'truncation': truncation},
    )


def wronskian_center_verdict(params: ExpPolyParams, truncation: int = DEFAULT_TRUNCATION,
                             tol: Tolerance = DEFAULT_TOLERANCE) -> CenterVerdict:
    """Center membership through linear dependence of the summands"""
    jets = [summand_jet(params, k, truncation) for k in range(params.shape.m)]
    if jet_order(wronskian(jets), tol) is None:
        return CenterVerdict(True, frozenset(range(params.shape.m)), CenterReason.WRONSKIAN_VANISHING)
    return CenterVerdict(False)


@dataclass
class FrobeniusReport:
    residual: float
    scale: float
    orders_lost: List[int]
    stages: List[Jet]
    final_order: int
    weight_radius: float = 1.0

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual

    def to_dict(self) -> Dict[str, Any]:
        return {
            'residual': self.residual,
            'scale': self.scale,
            'relative_residual': self.relative_residual,
            'orders_lost': list(self.orders_lost),
            'final_truncation': self.final_order,
            'weight_radius': self.weight_radius,
            'stages': [stage.to_json() for stage in self.stages],
        }


def nearest_zero(w: Jet, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """
    Modulus of the nearest zero of w away from the origin, from the roots of
    its truncated Taylor polynomial; inf when the polynomial has no roots.
    """
    shift = jet_order(w, tol) or 0
    core = w.coeffs[shift:]
    if core.size < 2:
        return math.inf
    core = poly.polytrim(core, ROOT_TRIM * float(np.abs(core).max()))
    if core.size < 2:
        return math.inf
    return float(np.min(np.abs(poly.polyroots(core))))


def _weighted_max(jet: Jet, radius: float) -> float:
    """max_n |c_n| radius^n, the largest coefficient of z -> jet(radius z)"""
    weights = radius ** np.arange(jet.trunc_order + 1)
    return float(np.max(np.abs(jet.coeffs) * weights))


def _times_quotient(h: Jet, numerator: Jet, denominator: Jet, tol: Tolerance) -> Tuple[Jet, int]:
    """h * numerator / denominator for jets whose quotient may be meromorphic at 0"""
    shift = jet_order(denominator, tol)
    if shift is None:
        raise FrobeniusError("Denominator Wronskian vanishes to truncation order")
    product = jet_mul(h, numerator)
    try:
        stripped = jet_div_monomial(product, shift, tol)
    except (OrderDeficiencyError, TruncationError) as e:
        raise FrobeniusError(
            f"Denominator vanishes to order {shift}, beyond the numerator in the valid window: {str(e)}"
        )
    core = jet_div_monomial(denominator, shift, tol)
    return jet_div(stripped, core, tol), shift


def frobenius_residual(fs: Sequence[Jet], g: Jet, tol: Tolerance = DEFAULT_TOLERANCE) -> FrobeniusReport:
    """
    Apply the order-l operator built from nested Wronskians W_0=1, W_1, ..., W_l:

        W_l/W_{l-1} d/dz W_{l-1}^2/(W_l W_{l-2}) d/dz ... W_1^2/(W_2 W_0) d/dz W_0/W_1 g

    right to left. For g in the span of fs the result vanishes. Residual and scale
    are largest coefficients after rescaling z to radius*z, where radius is half the
    distance to the nearest zero of a nested Wronskian (at most 1); the scale runs
    over g and every intermediate stage.
    """
    size = len(fs)
    if size < 1:
        raise ValueError("Frobenius operator needs at least one jet")
    base = min(min(f.trunc_order for f in fs), g.trunc_order)
    nested = [Jet.constant(1.0, base)] + [wronskian(fs[:s]) for s in range(1, size + 1)]
    for s, w in enumerate(nested[1:], start=1):
        if jet_order(w, tol) is None:
            raise FrobeniusError(f"Nested Wronskian W_{s} vanishes to truncation order")

    orders_lost: List[int] = []
    stages: List[Jet] = []
    h, lost = _times_quotient(g, nested[0], nested[1], tol)
    orders_lost.append(lost)
    stages.append(h)
    for s in range(1, size):
        h = jet_derivative(h)
        stages.append(h)
        h, lost = _times_quotient(h, jet_mul(nested[s], nested[s]), jet_mul(nested[s + 1], nested[s - 1]), tol)
        orders_lost.append(lost)
        stages.append(h)
    h = jet_derivative(h)
    stages.append(h)
    h, lost = _times_quotient(h, nested[size], nested[size - 1], tol)
    orders_lost.append(lost)
    stages.append(h)

    # Quotient stages have poles at zeros of the nested Wronskians, so their
    # coefficients grow like radius^-n and the high ones carry only rounding noise.
    radius = min(1.0, 0.5 * min(nearest_zero(w, tol) for w in nested[1:]))
    scale = max([_weighted_max(g, radius)] + [_weighted_max(stage, radius) for stage in stages[:-1]])
    residual = _weighted_max(h, radius)
    logger.debug(
        f"Frobenius residual {residual:.3e} at scale {scale:.3e} (radius {radius:.3g}), orders lost {orders_lost}"
    )
    return FrobeniusReport(residual, scale, orders_lost, stages, h.trunc_order, radius)
