"""
Truncated complex power series ("jets") at the origin.

A jet of truncation order N stores the coefficients a_0..a_N of
f(z) = a_0 + a_1 z + ... + a_N z^N + O(z^{N+1}). Coefficients beyond N are
unknown, not zero, so every binary operation works at the smaller of the two
truncation orders.

    >>> z = Jet.variable(4)
    >>> jet_exp(z).coeffs.real
    array([1.        , 1.        , 0.5       , 0.16666667, 0.04166667])
"""
import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Union

import numpy as np

from src.utils.errors import OrderDeficiencyError, SeriesDivisionError, TruncationError
from src.utils.reports import complex_to_pair, pair_to_complex

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 64

# Result of jet_order: an index, or None when the jet vanishes to its truncation order.
OrderResult = Optional[int]


@dataclass(frozen=True)
class Tolerance:
    """Finite-precision stand-in for exact vanishing of a coefficient"""
    rel_zero: float = 1e-10
    abs_floor: float = 1e-300

    def __post_init__(self):
        if not 0 <= self.rel_zero < 1:
            raise ValueError(f"rel_zero must lie in [0, 1), got {self.rel_zero}")
        if self.abs_floor < 0:
            raise ValueError(f"abs_floor must be nonnegative, got {self.abs_floor}")

    def threshold(self, scale: float) -> float:
        """Magnitude at or below which a coefficient counts as zero"""
        return max(self.rel_zero * scale, self.abs_floor)


DEFAULT_TOLERANCE = Tolerance()


class Jet:
    """Immutable truncated power series with complex coefficients"""

    __slots__ = ('_coeffs',)

    def __init__(self, coeffs: Union[Sequence[complex], np.ndarray], trunc_order: Optional[int] = None):
        values = np.asarray(coeffs, dtype=complex).ravel()
        if trunc_order is None:
            if values.size == 0:
                raise TruncationError("A jet needs at least one coefficient")
            trunc_order = values.size - 1
        if trunc_order < 0:
            raise TruncationError(f"Truncation order cannot be negative: {trunc_order}")
        padded = np.zeros(trunc_order + 1, dtype=complex)
        keep = min(values.size, trunc_order + 1)
        padded[:keep] = values[:keep]
        if not np.all(np.isfinite(padded)):
            raise ValueError("Jet coefficients must be finite")
        padded.setflags(write=False)
        self._coeffs = padded

    @classmethod
    def constant(cls, value: complex, trunc_order: int = DEFAULT_TRUNCATION) -> 'Jet':
        return cls([value], trunc_order)

    @classmethod
    def variable(cls, trunc_order: int = DEFAULT_TRUNCATION) -> 'Jet':
        """The jet of f(z) = z"""
        return cls([0.0, 1.0], trunc_order)

    @classmethod
    def zero(cls, trunc_order: int = DEFAULT_TRUNCATION) -> 'Jet':
        return cls([0.0], trunc_order)

    @classmethod
    def from_coeffs(cls, coeffs: Union[Sequence[complex], np.ndarray], trunc_order: int) -> 'Jet':
        """Coefficients a_0, a_1, ... zero-padded or cut to truncation order trunc_order"""
        return cls(coeffs, trunc_order)

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def trunc_order(self) -> int:
        return self._coeffs.size - 1

    def __len__(self) -> int:
        return self._coeffs.size

    def __getitem__(self, index):
        return self._coeffs[index]

    def __iter__(self):
        return iter(self._coeffs)

    def __repr__(self) -> str:
        return f"Jet(trunc_order={self.trunc_order}, coeffs={np.array2string(self._coeffs[:6], precision=4)}...)"

    def truncate(self, trunc_order: int) -> 'Jet':
        """Drop coefficients above trunc_order (never pads beyond the known ones)"""
        if trunc_order > self.trunc_order:
            raise TruncationError(
                f"Cannot raise truncation order from {self.trunc_order} to {trunc_order}"
            )
        return Jet(self._coeffs[:trunc_order + 1])

    def scale(self) -> float:
        """Largest coefficient magnitude"""
        return float(np.max(np.abs(self._coeffs)))

    def evaluate(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        """Horner evaluation of the truncated polynomial"""
        return np.polynomial.polynomial.polyval(z, self._coeffs)

    def to_json(self) -> List[List[float]]:
        return [complex_to_pair(c) for c in self._coeffs]

    @classmethod
    def from_json(cls, payload: Sequence[Any]) -> 'Jet':
        return cls([pair_to_complex(pair) for pair in payload])

    def __add__(self, other):
        if isinstance(other, Jet):
            return jet_add(self, other)
        return jet_add(self, Jet.constant(other, self.trunc_order))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return jet_sub(self, other)
        return jet_sub(self, Jet.constant(other, self.trunc_order))

    def __rsub__(self, other):
        return jet_neg(self) + other

    def __neg__(self):
        return jet_neg(self)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return jet_scale(self, other)

    __rmul__ = __mul__


def _common_order(a: Jet, b: Jet) -> int:
    return min(a.trunc_order, b.trunc_order)


def jet_add(a: Jet, b: Jet) -> Jet:
    """Coefficientwise sum at the smaller truncation order"""
    n = _common_order(a, b)
    return Jet(a.coeffs[:n + 1] + b.coeffs[:n + 1])


def jet_sub(a: Jet, b: Jet) -> Jet:
    n = _common_order(a, b)
    return Jet(a.coeffs[:n + 1] - b.coeffs[:n + 1])


def jet_neg(a: Jet) -> Jet:
    return Jet(-a.coeffs)


def jet_scale(a: Jet, factor: complex) -> Jet:
    return Jet(complex(factor) * a.coeffs)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product truncated at the smaller truncation order"""
    n = _common_order(a, b)
    return Jet(np.convolve(a.coeffs[:n + 1], b.coeffs[:n + 1])[:n + 1])


def jet_derivative(a: Jet) -> Jet:
    """d/dz; the result is one order shorter"""
    if a.trunc_order < 1:
        raise TruncationError("Cannot differentiate a jet of truncation order 0")
    k = np.arange(1, a.trunc_order + 1)
    return Jet(k * a.coeffs[1:])


def jet_exp(a: Jet) -> Jet:
    """
    Exponential of a jet via the recurrence n*b_n = sum_{k=1..n} k*a_k*b_{n-k},
    which follows from (e^f)' = f' e^f. A nonzero constant term contributes
    the scalar factor e^{a_0}.
    """
    n_max = a.trunc_order
    weighted = np.arange(n_max + 1) * a.coeffs
    b = np.zeros(n_max + 1, dtype=complex)
    b[0] = 1.0
    for n in range(1, n_max + 1):
        b[n] = np.dot(weighted[1:n + 1], b[n - 1::-1]) / n
    if a.coeffs[0] != 0:
        b = np.exp(a.coeffs[0]) * b
    return Jet(b)


def jet_order(a: Jet, tol: Tolerance = DEFAULT_TOLERANCE) -> OrderResult:
    """
    Order of vanishing at 0

    Returns:
        Optional[int]: smallest k with |a_k| above the tolerance threshold, or
        None when no coefficient up to the truncation order clears it
    """
    magnitudes = np.abs(a.coeffs)
    threshold = tol.threshold(float(magnitudes.max()))
    above = np.nonzero(magnitudes > threshold)[0]
    if above.size == 0:
        return None
    return int(above[0])


def jet_div_monomial(a: Jet, k: int, tol: Tolerance = DEFAULT_TOLERANCE) -> Jet:
    """Divide by z^k; requires a to vanish to order k within tolerance"""
    if k < 0:
        raise ValueError(f"Monomial degree must be nonnegative, got {k}")
    if k == 0:
        return a
    if k > a.trunc_order:
        raise TruncationError(
            f"Cannot divide a jet of truncation order {a.trunc_order} by z^{k}"
        )
    order = jet_order(a, tol)
    if order is not None and order < k:
        raise OrderDeficiencyError(
            f"Jet vanishes only to order {order}, cannot divide by z^{k}"
        )
    return Jet(a.coeffs[k:])


def jet_div(a: Jet, b: Jet, tol: Tolerance = DEFAULT_TOLERANCE) -> Jet:
    """Series quotient c with c*b = a up to the common truncation order"""
    n_max = _common_order(a, b)
    b0 = b.coeffs[0]
    if abs(b0) <= tol.threshold(b.scale()):
        raise SeriesDivisionError("Denominator series has a vanishing constant term")
    num = a.coeffs[:n_max + 1]
    den = b.coeffs[:n_max + 1]
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = num[0] / b0
    for n in range(1, n_max + 1):
        c[n] = (num[n] - np.dot(den[1:n + 1], c[n - 1::-1])) / b0
    return Jet(c)
