"""
Generalized exponential polynomials f(z) = sum_k P_k(z) exp(Q_k(z)).

P_k has degree <= p with coefficients c[k, 0..p]; Q_k has degree <= q,
no constant term, and coefficients d[k, 0..q-1] for z^1..z^q. Summands are
indexed from 0 in code.
"""
import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as poly
from scipy.optimize import bisect

from src.series.jet import (DEFAULT_TOLERANCE, DEFAULT_TRUNCATION, Jet, Tolerance,
                            jet_add, jet_exp, jet_mul)
from src.utils.errors import EvaluationOverflowError, PolynomialFamilyError, SchemaError
from src.utils.reports import complex_to_pair, pair_to_complex
from src.utils.sampling import circle_sup

logger = logging.getLogger(__name__)

# Largest real part of an exponent that np.exp can represent.
MAX_EXPONENT = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class FamilyShape:
    """m summands, deg P_k <= p, deg Q_k <= q"""
    m: int
    p: int
    q: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.p < 0:
            raise ValueError(f"p must be nonnegative, got {self.p}")
        if self.q < 1:
            raise ValueError(f"q must be positive, got {self.q}")

    @property
    def n_params(self) -> int:
        """N_{p,q,m} = m(p+q+1)"""
        return self.m * (self.p + self.q + 1)

    def to_dict(self) -> Dict[str, int]:
        return {'m': self.m, 'p': self.p, 'q': self.q}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'FamilyShape':
        try:
            return cls(int(payload['m']), int(payload['p']), int(payload['q']))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"Invalid family shape {payload!r}: {str(e)}")

    def __str__(self) -> str:
        return f"(m={self.m}, p={self.p}, q={self.q})"


@dataclass(frozen=True, eq=False)
class ExpPolyParams:
    """A parameter vector lambda = (c, d) of a generalized exponential polynomial"""
    shape: FamilyShape
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex)
        d = np.array(self.d, dtype=complex)
        m, p, q = self.shape.m, self.shape.p, self.shape.q
        if c.shape != (m, p + 1):
            raise ValueError(f"c must have shape {(m, p + 1)}, got {c.shape}")
        if d.shape != (m, q):
            raise ValueError(f"d must have shape {(m, q)}, got {d.shape}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(d))):
            raise ValueError("Parameters must be finite")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'd', d)

    @classmethod
    def from_polynomials(cls, P: Sequence[Sequence[complex]], Q: Sequence[Sequence[complex]]) -> 'ExpPolyParams':
        """
        Build parameters from coefficient lists

        Args:
            P: P_k coefficients, constant term first
            Q: Q_k coefficients of z^1, z^2, ... (no constant term)
        """
        if len(P) != len(Q) or not P:
            raise ValueError("P and Q must be nonempty lists of equal length")
        p = max(len(row) for row in P) - 1
        q = max(max(len(row) for row in Q), 1)
        shape = FamilyShape(len(P), max(p, 0), q)
        c = np.zeros((shape.m, shape.p + 1), dtype=complex)
        d = np.zeros((shape.m, shape.q), dtype=complex)
        for k, (p_row, q_row) in enumerate(zip(P, Q)):
            c[k, :len(p_row)] = p_row
            d[k, :len(q_row)] = q_row
        return cls(shape, c, d)

    @classmethod
    def zeros(cls, shape: FamilyShape) -> 'ExpPolyParams':
        return cls(shape, np.zeros((shape.m, shape.p + 1)), np.zeros((shape.m, shape.q)))

    @classmethod
    def random(cls, shape: FamilyShape, rng: np.random.Generator, radius: float = 1.0) -> 'ExpPolyParams':
        """Coordinates drawn from the disk of the given radius: uniform modulus, uniform argument"""
        def draw(size):
            return radius * rng.uniform(0.0, 1.0, size) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size))
        return cls(shape, draw((shape.m, shape.p + 1)), draw((shape.m, shape.q)))

    def vector(self) -> np.ndarray:
        """Flat coordinate vector in C^{N_{p,q,m}}"""
        return np.concatenate([self.c.ravel(), self.d.ravel()])

    @classmethod
    def from_vector(cls, shape: FamilyShape, vector: np.ndarray) -> 'ExpPolyParams':
        split = shape.m * (shape.p + 1)
        return cls(shape, vector[:split].reshape(shape.m, shape.p + 1),
                   vector[split:].reshape(shape.m, shape.q))

    def perturbed(self, rng: np.random.Generator, epsilon: float) -> 'ExpPolyParams':
        """Uniform draw from the complex epsilon-ball around this point"""
        dim = self.shape.n_params
        direction = rng.standard_normal(2 * dim)
        direction /= np.linalg.norm(direction)
        radius = epsilon * rng.uniform(0.0, 1.0) ** (1.0 / (2 * dim))
        offset = radius * (direction[:dim] + 1j * direction[dim:])
        return ExpPolyParams.from_vector(self.shape, self.vector() + offset)

    def scaled(self, t: complex) -> 'ExpPolyParams':
        """t * lambda"""
        return ExpPolyParams(self.shape, t * self.c, t * self.d)

    def q_coefficients(self, k: int) -> np.ndarray:
        """Q_k coefficients with the zero constant term prepended"""
        return np.concatenate(([0.0], self.d[k]))

    def is_polynomial(self, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        """True when every Q_k vanishes identically within tolerance"""
        return not np.any(np.abs(self.d) > tol.threshold(1.0))

    def recentered(self, w: complex) -> 'ExpPolyParams':
        """Parameters of z -> f(z + w): P_k(z+w) e^{Q_k(w)} and Q_k(z+w) - Q_k(w)"""
        shift = Polynomial([w, 1.0])
        c = np.zeros_like(self.c)
        d = np.zeros_like(self.d)
        for k in range(self.shape.m):
            q_shift = Polynomial(self.q_coefficients(k))(shift).coef
            q_at_w = q_shift[0]
            if q_at_w.real > MAX_EXPONENT:
                raise EvaluationOverflowError(f"Re Q_{k}(w) = {q_at_w.real:.3g} overflows")
            p_shift = Polynomial(self.c[k])(shift).coef * np.exp(q_at_w)
            n_p = min(p_shift.size, self.shape.p + 1)
            n_q = min(q_shift.size - 1, self.shape.q)
            c[k, :n_p] = p_shift[:n_p]
            d[k, :n_q] = q_shift[1:n_q + 1]
        return ExpPolyParams(self.shape, c, d)

    def product(self, other: 'ExpPolyParams') -> 'ExpPolyParams':
        """Parameters of f_self * f_other, summands ordered (k, l) row-major"""
        shape = FamilyShape(self.shape.m * other.shape.m, self.shape.p + other.shape.p,
                            max(self.shape.q, other.shape.q))
        c = np.zeros((shape.m, shape.p + 1), dtype=complex)
        d = np.zeros((shape.m, shape.q), dtype=complex)
        row = 0
        for k in range(self.shape.m):
            for l in range(other.shape.m):
                c[row] = np.convolve(self.c[k], other.c[l])
                d[row, :self.shape.q] += self.d[k]
                d[row, :other.shape.q] += other.d[l]
                row += 1
        return ExpPolyParams(shape, c, d)

    def derivative(self) -> 'ExpPolyParams':
        """Parameters of f' = sum_k (P_k' + P_k Q_k') e^{Q_k}"""
        shape = FamilyShape(self.shape.m, self.shape.p + self.shape.q - 1, self.shape.q)
        c = np.zeros((shape.m, shape.p + 1), dtype=complex)
        for k in range(shape.m):
            coeffs = poly.polyadd(poly.polyder(self.c[k]),
                                  poly.polymul(self.c[k], poly.polyder(self.q_coefficients(k))))
            c[k, :min(coeffs.size, shape.p + 1)] = coeffs[:shape.p + 1]
        return ExpPolyParams(shape, c, self.d.copy())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'm': self.shape.m, 'p': self.shape.p, 'q': self.shape.q,
            'c': [[complex_to_pair(v) for v in row] for row in self.c],
            'd': [[complex_to_pair(v) for v in row] for row in self.d],
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'ExpPolyParams':
        """Parse the {"m","p","q","c","d"} schema, complex entries as [re, im]"""
        if not isinstance(payload, dict):
            raise SchemaError("Parameters must be a JSON object")
        shape = FamilyShape.from_dict(payload)
        try:
            c = np.array([[pair_to_complex(v) for v in row] for row in payload['c']], dtype=complex)
            d = np.array([[pair_to_complex(v) for v in row] for row in payload['d']], dtype=complex)
            return cls(shape, c.reshape(shape.m, shape.p + 1), d.reshape(shape.m, shape.q))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"Invalid parameter payload: {str(e)}")

    def fingerprint(self) -> str:
        """Short sha256 digest of the canonical JSON encoding"""
        encoded = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(encoded).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"ExpPolyParams(shape={self.shape}, fingerprint={self.fingerprint()})"


class CenterReason(str, enum.Enum):
    STRUCTURAL = 'structural'
    COEFFICIENT_VANISHING = 'coefficient_vanishing'
    WRONSKIAN_VANISHING = 'wronskian_vanishing'


@dataclass(frozen=True)
class CenterVerdict:
    in_center: bool
    witness_subset: Optional[FrozenSet[int]] = None
    reason: Optional[CenterReason] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'in_center': self.in_center,
            'witness_subset': sorted(self.witness_subset) if self.witness_subset is not None else None,
            'reason': self.reason.value if self.reason is not None else None,
        }


def _exponents(params: ExpPolyParams, z: np.ndarray) -> np.ndarray:
    exponents = np.array([poly.polyval(z, params.q_coefficients(k)) for k in range(params.shape.m)])
    worst = float(np.max(exponents.real)) if exponents.size else 0.0
    if worst > MAX_EXPONENT:
        raise EvaluationOverflowError(
            f"Re Q_k(z) reaches {worst:.4g}, beyond the exponent range {MAX_EXPONENT:.4g}"
        )
    return exponents


def evaluate(params: ExpPolyParams, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """sum_k P_k(z) e^{Q_k(z)} by Horner evaluation of P_k and Q_k"""
    z_arr = np.asarray(z, dtype=complex)
    exponents = _exponents(params, z_arr)
    total = np.zeros_like(z_arr)
    for k in range(params.shape.m):
        total = total + poly.polyval(z_arr, params.c[k]) * np.exp(exponents[k])
    return total if total.ndim else complex(total)


def evaluate_derivative(params: ExpPolyParams, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """Analytic f'(z) = sum_k (P_k' + P_k Q_k') e^{Q_k}"""
    z_arr = np.asarray(z, dtype=complex)
    exponents = _exponents(params, z_arr)
    total = np.zeros_like(z_arr)
    for k in range(params.shape.m):
        p_val = poly.polyval(z_arr, params.c[k])
        dp_val = poly.polyval(z_arr, poly.polyder(params.c[k]))
        dq_val = poly.polyval(z_arr, poly.polyder(params.q_coefficients(k)))
        total = total + (dp_val + p_val * dq_val) * np.exp(exponents[k])
    return total if total.ndim else complex(total)


def summand_jet(params: ExpPolyParams, k: int, truncation: int = DEFAULT_TRUNCATION) -> Jet:
    """Jet of P_k e^{Q_k} at 0"""
    if not 0 <= k < params.shape.m:
        raise IndexError(f"Summand index {k} outside 0..{params.shape.m - 1}")
    p_jet = Jet.from_coeffs(params.c[k], truncation)
    q_jet = Jet.from_coeffs(params.q_coefficients(k), truncation)
    return jet_mul(p_jet, jet_exp(q_jet))


def family_jet(params: ExpPolyParams, truncation: int = DEFAULT_TRUNCATION) -> Jet:
    """Jet of f_lambda = sum of the summand jets"""
    total = Jet.zero(truncation)
    for k in range(params.shape.m):
        total = jet_add(total, summand_jet(params, k, truncation))
    return total


def weighted_compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """
    All (k_1, ..., k_parts) of nonnegative integers with k_1 + 2k_2 + ... = total,
    enumerated depth-first with k_parts outermost
    """
    if total < 0:
        return

    def descend(part: int, remaining: int, suffix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
        if part == 1:
            yield (remaining,) + suffix
            return
        for k in range(remaining // part + 1):
            yield from descend(part - 1, remaining - part * k, (k,) + suffix)

    yield from descend(parts, total, ())


@lru_cache(maxsize=256)
def _cached_compositions(total: int, parts: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(weighted_compositions(total, parts))


def maclaurin_coeff(params: ExpPolyParams, n: int, memoize: bool = False) -> complex:
    """
    a_n(lambda) from the closed multinomial formula

        a_n = sum_k sum_{j<=p} c_kj sum_{k_1+2k_2+...+qk_q = n-j} prod_i d_ki^{k_i} / k_i!
    """
    if n < 0:
        raise ValueError(f"Coefficient index must be nonnegative, got {n}")
    q = params.shape.q
    total = 0j
    for k in range(params.shape.m):
        d_row = [complex(v) for v in params.d[k]]
        for j in range(min(params.shape.p, n) + 1):
            c_kj = complex(params.c[k, j])
            if c_kj == 0:
                continue
            compositions = _cached_compositions(n - j, q) if memoize else weighted_compositions(n - j, q)
            inner = 0j
            for parts in compositions:
                term = 1 + 0j
                for i, k_i in enumerate(parts):
                    if k_i:
                        term *= d_row[i] ** k_i / math.factorial(k_i)
                inner += term
            total += c_kj * inner
    return total


def cyclicity_bound(shape: FamilyShape) -> int:
    """c_{p,q,m} = m - 1 + mp + m(m-1)(q-1)/2"""
    m, p, q = shape.m, shape.p, shape.q
    return m - 1 + m * p + m * (m - 1) * (q - 1) // 2


def wronskian_degree_bound(shape: FamilyShape) -> int:
    """Degree bound mp + m(m-1)(q-1)/2 for the polynomial factor of W(f_1..f_m)"""
    m, p, q = shape.m, shape.p, shape.q
    return m * p + m * (m - 1) * (q - 1) // 2


def psi_map(params: ExpPolyParams) -> ExpPolyParams:
    """c_ki -> c_ki^{i+1}, d_kj -> d_kj^j"""
    c_powers = np.arange(1, params.shape.p + 2)
    d_powers = np.arange(1, params.shape.q + 1)
    return ExpPolyParams(params.shape, params.c ** c_powers, params.d ** d_powers)


def _q_classes(params: ExpPolyParams, tol: Tolerance) -> List[List[int]]:
    """Partition summand indices by equality of Q_k coefficient vectors"""
    classes: List[List[int]] = []
    for k in range(params.shape.m):
        for members in classes:
            rep = params.d[members[0]]
            scale = max(float(np.max(np.abs(rep))), float(np.max(np.abs(params.d[k]))))
            if np.all(np.abs(rep - params.d[k]) <= tol.threshold(scale)):
                members.append(k)
                break
        else:
            classes.append([k])
    return classes


def center_membership(params: ExpPolyParams, tol: Tolerance = DEFAULT_TOLERANCE) -> CenterVerdict:
    """
    Decide whether f_lambda vanishes identically

    The structural test groups summands with equal Q_k; f vanishes iff the P_k
    of every group sum to the zero polynomial. The verdict is cross-checked
    against the Maclaurin coefficients a_0..a_{c_{p,q,m}}.
    """
    c_scale = float(np.max(np.abs(params.c)))
    p_threshold = tol.threshold(c_scale)
    carrying: List[int] = []
    structural = True
    for members in _q_classes(params, tol):
        if not np.any(np.abs(params.c[members]) > p_threshold):
            continue
        carrying.extend(members)
        if np.any(np.abs(params.c[members].sum(axis=0)) > p_threshold):
            structural = False

    bound = cyclicity_bound(params.shape)
    coefficients = family_jet(params, bound)
    scale = sum(summand_jet(params, k, bound).scale() for k in range(params.shape.m))
    coefficient_vanishing = bool(np.all(np.abs(coefficients.coeffs) <= tol.threshold(scale)))
    if structural != coefficient_vanishing:
        logger.warning(
            f"Center tests disagree for {params!r}: structural={structural}, "
            f"coefficients={coefficient_vanishing}"
        )
    if structural:
        witness = frozenset(carrying) if carrying else frozenset({0})
        return CenterVerdict(True, witness, CenterReason.STRUCTURAL)
    if coefficient_vanishing:
        return CenterVerdict(True, None, CenterReason.COEFFICIENT_VANISHING)
    return CenterVerdict(False)


def near_center(params: ExpPolyParams, threshold: float = 1e-8) -> bool:
    """All |a_n| below threshold for n <= c_{p,q,m}"""
    bound = cyclicity_bound(params.shape)
    return bool(np.all(np.abs(family_jet(params, bound).coeffs) < threshold))


def radius_normalizer(params: ExpPolyParams, w: complex = 0.0, tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """
    The radius R with max_k sup_{D_R(w)} |Q_k| = 1

    The boundary maximum grows strictly with R, so bisection on
    g(R) = max_k max_{|z-w|=R} |Q_k(z)| - 1 finds the unique root.
    """
    if params.is_polynomial(tol):
        raise PolynomialFamilyError("All Q_k vanish: f_lambda is a polynomial and has no R_{lambda;w}")
    rows = [params.q_coefficients(k) for k in range(params.shape.m)]

    def q_modulus(z: np.ndarray) -> np.ndarray:
        return np.max(np.abs(np.array([poly.polyval(z, row) for row in rows])), axis=0)

    at_center = float(q_modulus(np.array([w], dtype=complex))[0])
    if at_center >= 1.0:
        raise ValueError(f"max_k |Q_k(w)| = {at_center:.6g} >= 1, no positive normalizing radius")

    def gap(radius: float) -> float:
        return circle_sup(q_modulus, w, radius)[0] - 1.0

    hi = 1.0
    while gap(hi) <= 0:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("Normalizing radius search diverged")
    radius = bisect(gap, 0.0, hi, xtol=1e-15, rtol=1e-12, maxiter=400)
    logger.debug(f"R_lambda;w = {radius:.12g} for w = {w}")
    return float(radius)
