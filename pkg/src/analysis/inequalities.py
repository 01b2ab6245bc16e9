import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from src.analysis.zero_counter import Disk, ZeroCounter
from src.families.exp_poly import ExpPolyParams, cyclicity_bound, evaluate, radius_normalizer
from src.series.jet import DEFAULT_TOLERANCE, Tolerance
from src.utils.errors import ContourUnderflowError, ConvergenceError
from src.utils.reports import InequalityReport, complex_to_pair
from src.utils.sampling import DEFAULT_SEGMENT_POINTS, circle_sup, segment_sup

# A = exp(((e+1)/(e-1))^2), the constant of the Cartan-type estimate
CARTAN_A = math.exp(((math.e + 1.0) / (math.e - 1.0)) ** 2)

Segment = Tuple[float, float]


@dataclass(frozen=True)
class CartanConfig:
    H: float = 1.0
    d: float = 1.0
    w: complex = 0j
    R: float = 0.2
    grid: int = 64
    radius_factor: float = 0.5

    def __post_init__(self):
        if not 0 < self.H <= 1:
            raise ValueError(f"H must lie in (0, 1], got {self.H}")
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.grid < 2:
            raise ValueError("grid must be at least 2")
        object.__setattr__(self, 'w', complex(self.w))

    @property
    def A(self) -> float:
        return CARTAN_A

    @property
    def budget(self) -> float:
        """(2HR)^d / d, the allowed sum of r_j^d"""
        return (2.0 * self.H * self.R) ** self.d / self.d


@dataclass(frozen=True)
class RemezConfig:
    interval: Segment
    omega: Tuple[Segment, ...]
    c_exponent: Optional[int] = None
    c_hat: float = 1.0
    radius_factor: float = 0.5

    def __post_init__(self):
        lo, hi = sorted(map(float, self.interval))
        if hi <= lo:
            raise ValueError("Interval must have positive length")
        pieces = tuple(tuple(sorted(map(float, piece))) for piece in self.omega)
        if not pieces:
            raise ValueError("omega must contain at least one segment")
        for a, b in pieces:
            if b <= a:
                raise ValueError(f"omega piece [{a}, {b}] has no length")
            if a < lo or b > hi:
                raise ValueError(f"omega piece [{a}, {b}] leaves the interval [{lo}, {hi}]")
        if self.c_hat <= 0:
            raise ValueError("c_hat must be positive")
        object.__setattr__(self, 'interval', (lo, hi))
        object.__setattr__(self, 'omega', pieces)

    @property
    def interval_measure(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def omega_measure(self) -> float:
        """Linear measure of the union of the omega pieces"""
        total, reach = 0.0, -math.inf
        for a, b in sorted(self.omega):
            a = max(a, reach)
            if b > a:
                total += b - a
            reach = max(reach, b)
        return total

    @property
    def growth_argument(self) -> float:
        """2 m(I)/m(omega) - 1"""
        return 2.0 * self.interval_measure / self.omega_measure - 1.0


def phi(t: float) -> float:
    """Phi(t) = t + sqrt(t^2 - 1) for t >= 1"""
    if t < 1.0:
        raise ValueError(f"Phi is defined for t >= 1, got {t}")
    return t + math.sqrt((t - 1.0) * (t + 1.0))


def chebyshev(p: int, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """T_p(x) by the recurrence T_{n+1} = 2x T_n - T_{n-1}"""
    if p < 0:
        raise ValueError(f"Chebyshev degree must be nonnegative, got {p}")
    previous, current = np.ones_like(x, dtype=float), np.asarray(x, dtype=float)
    if p == 0:
        return previous if np.ndim(x) else float(previous)
    for _ in range(p - 1):
        previous, current = current, 2.0 * x * current - previous
    return current if np.ndim(x) else float(current)


def _union_sup(func, pieces: Sequence[Segment], points_per_unit: float) -> Tuple[float, complex]:
    best, where = -math.inf, 0j
    for a, b in pieces:
        sup, at = segment_sup(func, a, b, points=max(16, int(round(points_per_unit * (b - a)))))
        if sup > best:
            best, where = sup, at
    return best, where


def classical_remez_verify(coeffs: Sequence[float], interval: Segment,
                           omega: Sequence[Segment]) -> InequalityReport:
    """sup_I |f| <= T_p(2 m(I)/m(omega) - 1) sup_omega |f| for a real polynomial f of degree p"""
    cfg = RemezConfig(interval=tuple(interval), omega=tuple(tuple(piece) for piece in omega))
    polynomial = Polynomial(np.asarray(coeffs, dtype=float)).trim()
    degree = polynomial.degree()
    density = DEFAULT_SEGMENT_POINTS / cfg.interval_measure

    def f(x):
        return polynomial(np.real(x))

    sup_interval, _ = segment_sup(f, *cfg.interval)
    sup_omega, _ = _union_sup(f, cfg.omega, density)
    factor = chebyshev(degree, cfg.growth_argument)
    rhs = factor * sup_omega
    return InequalityReport(
        name='classical_remez',
        lhs=sup_interval,
        rhs=rhs,
        satisfied=sup_interval <= rhs * (1.0 + 1e-9) + 1e-300,
        details={'degree': degree, 'chebyshev_factor': factor, 'growth_argument': cfg.growth_argument,
                 'resolution': DEFAULT_SEGMENT_POINTS},
    )


class InequalityVerifier:
    """Desk-scale checks of the Cartan-type estimate and the Remez-type inequality"""

    def __init__(self, tol: Tolerance = DEFAULT_TOLERANCE, counter: Optional[ZeroCounter] = None):
        self.tol = tol
        self.counter = counter or ZeroCounter()
        self.shrink_ladder = tuple(2.0 ** -j for j in range(24))
        self.logger = logging.getLogger(__name__)

    def _guaranteed_radius(self, params: ExpPolyParams, w: complex, radius_factor: float) -> float:
        return radius_normalizer(params, w, self.tol) * radius_factor

    def exclusion_disks(self, zeros: Sequence[complex], cfg: CartanConfig,
                        shrink: float = 1.0) -> List[Tuple[complex, float]]:
        """Equal-radius disks at the zeros; shrink=1 spends the whole budget"""
        if not zeros:
            return []
        if not 0 < shrink <= 1:
            raise ValueError(f"shrink must lie in (0, 1], got {shrink}")
        count = len(zeros)
        radius = shrink * 2.0 * cfg.H * cfg.R * (count * cfg.d) ** (-1.0 / cfg.d)
        disks = [(complex(z), radius) for z in zeros]
        used = sum(r ** cfg.d for _, r in disks)
        assert used <= cfg.budget * (1.0 + 1e-12), f"exclusion budget exceeded: {used} > {cfg.budget}"
        return disks

    def cartan_verify(self, params: ExpPolyParams, cfg: CartanConfig) -> InequalityReport:
        """
        |f(z)| >= sup_{D_R(w)} |f| * (H/A)^{c+1} on D_{R/e}(w) outside the exclusion disks

        For polynomial f the exponent c+1 is replaced by p and no radius restriction applies.
        Disk radii start at the full budget and halve until the inequality holds on the
        remaining lattice points. A failure means no disk family on that ladder is a
        witness, not that the estimate fails.
        """
        try:
            polynomial = params.is_polynomial(self.tol)
            if polynomial:
                exponent = params.shape.p
                limit = math.inf
            else:
                exponent = cyclicity_bound(params.shape) + 1
                limit = self._guaranteed_radius(params, cfg.w, cfg.radius_factor)
                if cfg.R >= limit:
                    raise ValueError(
                        f"R = {cfg.R} is not below R_lambda;w * R_F = {limit:.6g}"
                    )

            zero_report = self.counter.count_zeros(params, Disk(cfg.w, cfg.R))
            if zero_report.count and not zero_report.agreed:
                raise ConvergenceError("Zero locations unavailable: oracle and argument principle disagree")
            zeros = [root for root, _ in zero_report.oracle_roots]

            def f(z):
                return evaluate(params, z)

            sup_outer, _ = circle_sup(f, cfg.w, cfg.R)
            rhs = sup_outer * (cfg.H / cfg.A) ** exponent
            inner = cfg.R / math.e
            axis = np.linspace(-inner, inner, cfg.grid)
            lattice = (cfg.w + axis[None, :] + 1j * axis[:, None]).ravel()
            lattice = lattice[np.abs(lattice - cfg.w) < inner]
            values = np.abs(f(lattice))

            attempt = None
            for shrink in self.shrink_ladder if zeros else (1.0,):
                disks = self.exclusion_disks(zeros, cfg, shrink)
                keep = np.ones(lattice.size, dtype=bool)
                for center, radius in disks:
                    keep &= np.abs(lattice - center) >= radius
                if not np.any(keep):
                    continue
                kept = np.nonzero(keep)[0]
                worst = int(kept[np.argmin(values[kept])])
                attempt = (shrink, disks, worst, int(kept.size))
                if values[worst] >= rhs:
                    break
            if attempt is None:
                raise ValueError("Every lattice point lies inside an exclusion disk")

            shrink, disks, worst, kept_points = attempt
            lhs = float(values[worst])
            satisfied = lhs >= rhs
            if not satisfied:
                self.logger.warning(f"Cartan witness not found for {params!r}")
            return InequalityReport(
                name='cartan',
                lhs=lhs,
                rhs=rhs,
                satisfied=satisfied,
                witness={
                    'centers': [complex_to_pair(c) for c, _ in disks],
                    'radii': [r for _, r in disks],
                    'shrink': shrink,
                    'budget': cfg.budget,
                    'budget_used': sum(r ** cfg.d for _, r in disks),
                    'worst_point': complex_to_pair(lattice[worst]),
                },
                details={
                    'orientation': 'lower',
                    'exponent': exponent,
                    'A': cfg.A,
                    'sup_outer': sup_outer,
                    'polynomial': polynomial,
                    'radius_limit': limit,
                    'zero_count': zero_report.count,
                    'lattice_points': kept_points,
                    'grid': cfg.grid,
                    'outcome': 'witness found' if satisfied else 'witness not found',
                },
            )
        except Exception as e:
            self.logger.error(f"Error in cartan_verify: {str(e)}")
            raise

    def remez_verify(self, params: ExpPolyParams, cfg: RemezConfig, w: complex = 0j) -> InequalityReport:
        """
        sup_I |f| <= Phi(2 m(I)/m(omega) - 1)^{c_hat * max(1, c)} sup_omega |f|

        For polynomial f the factor is the classical T_p(2 m(I)/m(omega) - 1).
        Also reports the smallest exponent E that makes the inequality hold and
        E / max(1, c) as an empirical lower bound for c_hat.
        """
        try:
            c = cfg.c_exponent if cfg.c_exponent is not None else cyclicity_bound(params.shape)
            polynomial = params.is_polynomial(self.tol)
            if not polynomial:
                limit = self._guaranteed_radius(params, w, cfg.radius_factor) / math.e
                far = max(abs(cfg.interval[0] - w), abs(cfg.interval[1] - w))
                if far >= limit:
                    raise ValueError(f"Interval leaves D_{{{limit:.6g}}}({w})")

            def f(x):
                return evaluate(params, np.asarray(x, dtype=complex))

            density = DEFAULT_SEGMENT_POINTS / cfg.interval_measure
            sup_interval, _ = segment_sup(f, *cfg.interval)
            sup_omega, _ = _union_sup(f, cfg.omega, density)
            if sup_omega <= self.tol.threshold(sup_interval):
                raise ContourUnderflowError("f vanishes on omega: the parameter is a center point")

            t = cfg.growth_argument
            base = phi(t)
            exponent = cfg.c_hat * max(1, c)
            if polynomial:
                factor = chebyshev(params.shape.p, t)
            else:
                factor = base ** exponent
            rhs = factor * sup_omega
            ratio = sup_interval / sup_omega
            if ratio <= 1.0 + 1e-12:
                empirical = 0.0
            elif base <= 1.0 + 1e-15:
                empirical = math.inf
            else:
                empirical = math.log(ratio) / math.log(base)
            details = {
                'growth_argument': t,
                'phi': base,
                'exponent': exponent,
                'c': c,
                'c_hat': cfg.c_hat,
                'empirical_c_hat': empirical / max(1, c),
                'sup_omega': sup_omega,
                'polynomial': polynomial,
                'resolution': DEFAULT_SEGMENT_POINTS,
                'bound': 'chebyshev' if polynomial else 'phi',
            }
            if polynomial:
                details['chebyshev_factor'] = factor
            return InequalityReport(
                name='remez',
                lhs=sup_interval,
                rhs=rhs,
                satisfied=sup_interval <= rhs * (1.0 + 1e-9),
                empirical_exponent=empirical,
                details=details,
            )
        except Exception as e:
            self.logger.error(f"Error in remez_verify: {str(e)}")
            raise


def cartan_verify(params: ExpPolyParams, cfg: CartanConfig) -> InequalityReport:
    return InequalityVerifier().cartan_verify(params, cfg)


def remez_verify(params: ExpPolyParams, cfg: RemezConfig, w: complex = 0j) -> InequalityReport:
    return InequalityVerifier().remez_verify(params, cfg, w)
