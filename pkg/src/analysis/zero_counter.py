"""Zero counting for exponential polynomials: argument principle plus a root-finding oracle"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as poly

from src.families.exp_poly import ExpPolyParams, evaluate, evaluate_derivative, family_jet
from src.series.jet import Jet, Tolerance, jet_order
from src.utils.errors import ContourUnderflowError, ConvergenceError
from src.utils.reports import complex_to_pair, pair_to_complex
from src.utils.sampling import circle_sup

logger = logging.getLogger(__name__)

RootList = List[Tuple[complex, int]]


@dataclass(frozen=True)
class Disk:
    """Open disk |z - center| < radius"""
    center: complex
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"Disk radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, 'center', complex(self.center))

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius

    def to_dict(self) -> Dict[str, Any]:
        return {'center': complex_to_pair(self.center), 'radius': self.radius}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'Disk':
        return cls(pair_to_complex(payload.get('center', 0.0)), float(payload['radius']))


@dataclass
class ZeroCountReport:
    disk: Disk
    count: int
    quadrature_residual: float
    oracle_roots: RootList = field(default_factory=list)
    agreed: bool = False
    nodes: int = 0
    requested_radius: Optional[float] = None

    @property
    def perturbed(self) -> bool:
        return self.requested_radius is not None and self.requested_radius != self.disk.radius

    def oracle_count(self) -> int:
        return sum(multiplicity for _, multiplicity in self.oracle_roots)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'disk': self.disk.to_dict(),
            'count': self.count,
            'residual': self.quadrature_residual,
            'roots': [{'root': complex_to_pair(root), 'multiplicity': mult} for root, mult in self.oracle_roots],
            'agreed': self.agreed,
            'nodes': self.nodes,
            'perturbed': self.perturbed,
        }


def _cluster_roots(roots: Sequence[complex], radius: float) -> RootList:
    clusters: List[List[complex]] = []
    for root in roots:
        for members in clusters:
            if abs(root - np.mean(members)) < radius:
                members.append(root)
                break
        else:
            clusters.append([root])
    return [(complex(np.mean(members)), len(members)) for members in clusters]


def durand_kerner(coeffs: np.ndarray, max_iter: int = 500, tol: float = 1e-12) -> np.ndarray:
    """
    All roots of sum_k coeffs[k] u^k by simultaneous Weierstrass iteration

    Raises:
        ConvergenceError: corrections still above tol after max_iter sweeps
    """
    degree = coeffs.size - 1
    if degree < 1:
        return np.zeros(0, dtype=complex)
    monic = coeffs / coeffs[-1]
    radius = abs(monic[0]) ** (1.0 / degree) if monic[0] != 0 else 1.0
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(degree) / degree + 0.4))
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        delta = poly.polyval(z, monic) / np.prod(diff, axis=1)
        z = z - delta
        if np.all(np.abs(delta) <= tol * np.maximum(1.0, np.abs(z))):
            return z
    raise ConvergenceError(f"Durand-Kerner did not converge in {max_iter} iterations")


def oracle_roots(jet: Jet, disk: Disk, tail_bound: float = 1e-14,
                 cluster_radius: float = 1e-6) -> RootList:
    """
    Roots of the truncated polynomial of a jet inside a disk, with multiplicities

    Args:
        jet (Jet): Maclaurin jet at 0; the disk is given in the same coordinate
        disk (Disk): Only roots inside it are returned
        tail_bound (float): Relative size below which trailing weighted coefficients are dropped
        cluster_radius (float): Roots closer than this are merged

    Returns:
        List[Tuple[complex, int]]: distinct roots and their multiplicities
    """
    rho = abs(disk.center) + disk.radius
    weighted = jet.coeffs * rho ** np.arange(jet.trunc_order + 1)
    scale = float(np.max(np.abs(weighted)))
    if scale == 0.0:
        raise ValueError("Zero jet has no isolated roots")
    tail = float(np.max(np.abs(weighted[-3:])))
    if tail > tail_bound * scale:
        logger.warning(f"Discarded tail {tail / scale:.2e} exceeds the bound {tail_bound:.1e}")

    significant = np.nonzero(np.abs(weighted) > tail_bound * scale)[0]
    degree = int(significant[-1])
    at_origin = jet_order(Jet(weighted[:degree + 1]), Tolerance(rel_zero=tail_bound)) or 0
    reduced = weighted[at_origin:degree + 1]
    found = list(rho * durand_kerner(reduced)) + [0j] * at_origin
    clustered = _cluster_roots(found, cluster_radius)
    return sorted(((root, mult) for root, mult in clustered if disk.contains(root)),
                  key=lambda item: (abs(item[0]), item[0].real, item[0].imag))


class ZeroCounter:
    """Argument-principle zero counts with adaptive trapezoidal quadrature"""

    def __init__(self, initial_nodes: int = 256, max_nodes: int = 2 ** 16, target: float = 1e-3,
                 acceptance: float = 0.25, perturbations: Sequence[float] = (1e-4, 2e-4, 3e-4),
                 with_oracle: bool = True, oracle_tail_bound: float = 1e-14):
        self.initial_nodes = initial_nodes
        self.max_nodes = max_nodes
        self.target = target
        self.acceptance = acceptance
        self.perturbations = tuple(perturbations)
        self.with_oracle = with_oracle
        self.oracle_tail_bound = oracle_tail_bound
        self.logger = logging.getLogger(__name__)

    def winding_number(self, f: Callable[[np.ndarray], np.ndarray], df: Callable[[np.ndarray], np.ndarray],
                       disk: Disk) -> Tuple[complex, int]:
        """
        (1/2 pi i) * contour integral of f'/f over the boundary circle

        Returns:
            Tuple[complex, int]: the integral and the node count that settled it
        """
        nodes = self.initial_nodes
        previous: Optional[complex] = None
        while nodes <= self.max_nodes:
            unit = np.exp(2j * np.pi * np.arange(nodes) / nodes)
            z = disk.center + disk.radius * unit
            values = f(z)
            if np.min(np.abs(values)) < np.finfo(float).tiny:
                raise ContourUnderflowError(f"|f| underflows on the circle of radius {disk.radius}")
            value = complex(disk.radius * np.mean(df(z) / values * unit))
            residual = abs(value - round(value.real))
            if previous is not None and abs(value - previous) < self.target and residual < self.target:
                return value, nodes
            previous = value
            nodes *= 2
        raise ConvergenceError(
            f"Argument principle did not settle with {self.max_nodes} nodes on radius {disk.radius}"
        )

    def _oracle_jet(self, params: ExpPolyParams, radius: float) -> Jet:
        truncation = 24
        while True:
            jet = family_jet(params, truncation)
            weighted = np.abs(jet.coeffs) * radius ** np.arange(truncation + 1)
            if np.max(weighted[-4:]) <= self.oracle_tail_bound * np.max(weighted) or truncation >= 192:
                return jet
            truncation *= 2

    def count_zeros(self, params: ExpPolyParams, disk: Disk) -> ZeroCountReport:
        """Zeros of f_lambda in the disk, counted with multiplicity"""

        def f(z):
            return evaluate(params, z)

        def df(z):
            return evaluate_derivative(params, z)

        radii = [disk.radius] + [disk.radius * (1.0 + eta) for eta in self.perturbations]
        last_error: Optional[Exception] = None
        for radius in radii:
            trial = Disk(disk.center, radius)
            try:
                value, nodes = self.winding_number(f, df, trial)
                break
            except ConvergenceError as e:
                self.logger.warning(f"Quadrature failed on radius {radius:.8g}: {str(e)}")
                last_error = e
        else:
            raise ConvergenceError(f"Zero count failed on every perturbed radius: {str(last_error)}")

        count = int(round(value.real))
        residual = abs(value - count)
        if residual >= self.acceptance:
            raise ConvergenceError(f"Winding number {value} is not near an integer")
        report = ZeroCountReport(trial, count, residual, nodes=nodes, requested_radius=disk.radius)
        if trial.radius != disk.radius:
            self.logger.warning(f"Counted on perturbed radius {trial.radius:.8g} instead of {disk.radius:.8g}")

        if self.with_oracle:
            try:
                local = params.recentered(disk.center)
                jet = self._oracle_jet(local, trial.radius)
                roots = oracle_roots(jet, Disk(0.0, trial.radius), self.oracle_tail_bound)
                report.oracle_roots = [(root + disk.center, mult) for root, mult in roots]
                report.agreed = report.oracle_count() == count
                if not report.agreed:
                    self.logger.warning(
                        f"Oracle found {report.oracle_count()} roots, argument principle {count}"
                    )
            except (ConvergenceError, ValueError) as e:
                self.logger.warning(f"Root oracle unavailable: {str(e)}")
        return report

    def doubling_index(self, params: ExpPolyParams, w: complex, radius: float) -> float:
        """sup_{|z-w|=R} ln|f| - sup_{|z-w|=R/e} ln|f|"""
        def f(z):
            return evaluate(params, z)

        outer, _ = circle_sup(f, w, radius)
        inner, _ = circle_sup(f, w, radius / math.e)
        if inner <= 0.0 or outer <= 0.0:
            raise ContourUnderflowError(f"|f| underflows on the circle of radius {radius / math.e:.6g}")
        return math.log(outer) - math.log(inner)


def count_zeros(params: ExpPolyParams, disk: Disk, with_oracle: bool = True) -> ZeroCountReport:
    return ZeroCounter(with_oracle=with_oracle).count_zeros(params, disk)


def doubling_index(params: ExpPolyParams, w: complex, radius: float) -> float:
    return ZeroCounter(with_oracle=False).doubling_index(params, w, radius)
