"""
Randomized sweeps over parameter space.

Every sample draws its randomness from numpy.random.default_rng([seed, index]),
so a sweep gives the same rows in the same order for any worker count.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from src.analysis.zero_counter import Disk, ZeroCounter
from src.families.exp_poly import (ExpPolyParams, FamilyShape, center_membership, cyclicity_bound,
                                   family_jet, maclaurin_coeff, near_center)
from src.families.wronskian import WronskianTable, wronskian_degree_check, wronskian_table
from src.series.jet import DEFAULT_TOLERANCE, DEFAULT_TRUNCATION, OrderResult, Tolerance, jet_order
from src.utils.errors import CenterSetError, ConvergenceError, SchemaError, SweepError, TruncationError

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


@dataclass(frozen=True)
class SweepConfig:
    shape: FamilyShape
    base_point: Optional[ExpPolyParams] = None
    epsilon: float = 1e-2
    delta: float = 0.1
    samples: int = 100
    seed: int = 0
    workers: int = 1
    truncation: int = DEFAULT_TRUNCATION
    cross_check: bool = True

    def __post_init__(self):
        if self.epsilon <= 0 or self.delta <= 0:
            raise ValueError(f"epsilon and delta must be positive, got {self.epsilon}, {self.delta}")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1, got {self.samples}")
        if self.base_point is not None and self.base_point.shape != self.shape:
            raise ValueError(f"Base point shape {self.base_point.shape} differs from {self.shape}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'shape': self.shape.to_dict(),
            'base_point': None if self.base_point is None else self.base_point.to_dict(),
            'epsilon': self.epsilon,
            'delta': self.delta,
            'samples': self.samples,
            'seed': self.seed,
            'truncation': self.truncation,
            'cross_check': self.cross_check,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'SweepConfig':
        try:
            base = payload.get('base_point')
            base_point = None if base is None else ExpPolyParams.from_dict(base)
            shape = FamilyShape.from_dict(payload['shape']) if 'shape' in payload else base_point.shape
            return cls(
                shape=shape,
                base_point=base_point,
                epsilon=float(payload.get('epsilon', 1e-2)),
                delta=float(payload.get('delta', 0.1)),
                samples=int(payload.get('samples', 100)),
                seed=int(payload.get('seed', 0)),
                workers=int(payload.get('workers', 1)),
                truncation=int(payload.get('truncation', DEFAULT_TRUNCATION)),
                cross_check=bool(payload.get('cross_check', True)),
            )
        except (KeyError, TypeError, AttributeError) as e:
            raise SchemaError(f"Invalid sweep configuration: {str(e)}")


@dataclass
class RolleReport:
    ord_sum: OrderResult
    table: WronskianTable
    bound: int
    satisfied: bool
    vacuous: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ord_sum': -1 if self.ord_sum is None else self.ord_sum,
            'bound': self.bound,
            'satisfied': self.satisfied,
            'vacuous': self.vacuous,
            'table': self.table.to_json(),
        }


@dataclass
class SweepReport:
    kind: str
    config: Dict[str, Any]
    rows: List[Row] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    argmax: Optional[ExpPolyParams] = None

    @property
    def histogram(self) -> Dict[int, int]:
        counts = Counter(row['count'] for row in self.rows if row.get('count') is not None)
        return dict(sorted(counts.items()))

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            'kind': self.kind,
            'config': self.config,
            'summary': self.summary,
            'rows': self.rows,
        }
        if any('count' in row for row in self.rows):
            payload['histogram'] = {str(k): v for k, v in self.histogram.items()}
        if self.argmax is not None:
            payload['argmax'] = self.argmax.to_dict()
        return payload


def rolle_check(params: ExpPolyParams, truncation: int = DEFAULT_TRUNCATION,
                tol: Tolerance = DEFAULT_TOLERANCE) -> RolleReport:
    """ord_0 f_lambda <= max over subsets I of m_I + |I| - 1"""
    table = wronskian_table(params, truncation, tol)
    bound = table.rolle_bound()
    if center_membership(params, tol).in_center:
        logger.info(f"Rolle check at a center point is vacuous: {params!r}")
        return RolleReport(None, table, -1 if bound is None else bound, True, vacuous=True)
    ord_sum = jet_order(family_jet(params, truncation), tol)
    if ord_sum is None:
        raise TruncationError(f"Truncation {truncation} exhausted before the order of f resolved")
    if bound is None:
        raise TruncationError(f"Truncation {truncation} exhausted before any Wronskian order resolved")
    return RolleReport(ord_sum, table, bound, ord_sum <= bound)


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _map_samples(worker: Callable[[int], Row], samples: int, workers: int) -> List[Row]:
    if workers > 1:
        with Pool(processes=workers) as pool:
            return pool.map(worker, range(samples))
    return [worker(index) for index in range(samples)]


def _count_row(params: ExpPolyParams, index: int, disk: Disk, cross_check: bool,
               tol: Tolerance) -> Row:
    row: Row = {'index': index, 'hash': params.fingerprint(), 'count': None,
                'residual': None, 'agreed': None, 'status': 'ok'}
    if center_membership(params, tol).in_center:
        row['status'] = 'center'
        return row
    if near_center(params):
        row['status'] = 'near_center'
        return row
    try:
        report = ZeroCounter(with_oracle=cross_check).count_zeros(params, disk)
    except ConvergenceError as e:
        row['status'] = 'error'
        row['error'] = str(e)
        return row
    row.update(count=report.count, residual=report.quadrature_residual,
               agreed=report.agreed if cross_check else None, radius=report.disk.radius)
    return row


def _perturbed_sample(cfg: SweepConfig, tol: Tolerance, index: int) -> Row:
    params = cfg.base_point.perturbed(_sample_rng(cfg.seed, index), cfg.epsilon)
    return _count_row(params, index, Disk(0.0, cfg.delta), cfg.cross_check, tol)


def _random_sample(shape: FamilyShape, seed: int, radius: float, cross_check: bool,
                   tol: Tolerance, index: int) -> Row:
    params = ExpPolyParams.random(shape, _sample_rng(seed, index))
    return _count_row(params, index, Disk(0.0, radius), cross_check, tol)


def _coefficient_sample(shape: FamilyShape, seed: int, n_max: int, index: int) -> Row:
    params = ExpPolyParams.random(shape, _sample_rng(seed, index))
    majorant = ExpPolyParams(shape, np.abs(params.c), np.abs(params.d))
    jet = family_jet(params, n_max)
    reference = family_jet(majorant, n_max)
    worst = 0.0
    for n in range(n_max + 1):
        closed = maclaurin_coeff(params, n, memoize=True)
        scale = max(abs(reference.coeffs[n]), np.finfo(float).tiny)
        worst = max(worst, abs(closed - jet.coeffs[n]) / scale)
    return {'index': index, 'hash': params.fingerprint(), 'max_relative_error': worst, 'status': 'ok'}


def _rolle_sample(shape: FamilyShape, seed: int, truncation: int, tol: Tolerance, index: int) -> Row:
    params = ExpPolyParams.random(shape, _sample_rng(seed, index))
    row: Row = {'index': index, 'hash': params.fingerprint(), 'status': 'ok'}
    try:
        rolle = rolle_check(params, truncation, tol)
        if rolle.vacuous:
            row['status'] = 'center'
            return row
        degree = wronskian_degree_check(params, truncation, tol)
    except (TruncationError, CenterSetError) as e:
        row['status'] = 'error'
        row['error'] = str(e)
        return row
    row.update(ord_sum=rolle.ord_sum, bound=rolle.bound, satisfied=rolle.satisfied,
               tight=rolle.ord_sum == rolle.bound, m_full=int(degree.lhs),
               degree_bound=int(degree.rhs), degree_satisfied=degree.satisfied)
    return row


def maximal_order_point(shape: FamilyShape, rng: np.random.Generator, spread: float = 2.0) -> ExpPolyParams:
    """
    Parameters whose f vanishes at 0 to order m(p+1) - 1

    The linear parts of Q_k sit evenly on the circle |d| = spread (random rotation),
    the higher Q coefficients come from the unit disk scaled by 1/2. The c vector is
    a unit null vector of the linear map c -> (a_0, ..., a_{m(p+1)-2}).
    """
    angles = 2.0 * np.pi * (np.arange(shape.m) / shape.m + rng.uniform(0.0, 1.0))
    d = 0.5 * ExpPolyParams.random(shape, rng).d
    d[:, 0] = spread * np.exp(1j * angles)
    unknowns = shape.m * (shape.p + 1)
    if unknowns == 1:
        return ExpPolyParams(shape, np.ones((1, 1), dtype=complex), d)
    columns = []
    for k in range(shape.m):
        for j in range(shape.p + 1):
            c = np.zeros((shape.m, shape.p + 1), dtype=complex)
            c[k, j] = 1.0
            columns.append(family_jet(ExpPolyParams(shape, c, d), unknowns - 2).coeffs)
    kernel = null_space(np.column_stack(columns))
    return ExpPolyParams(shape, kernel[:, 0].reshape(shape.m, shape.p + 1), d)


def _witness_row(shape: FamilyShape, seed: int, truncation: int, tol: Tolerance, index: int) -> Row:
    params = maximal_order_point(shape, _sample_rng(seed, index))
    row: Row = {'index': index, 'shape': shape.to_dict(), 'hash': params.fingerprint(), 'status': 'ok'}
    try:
        rolle = rolle_check(params, truncation, tol)
    except TruncationError as e:
        row['status'] = 'error'
        row['error'] = str(e)
        return row
    row.update(ord_sum=rolle.ord_sum, bound=rolle.bound, tight=rolle.ord_sum == rolle.bound)
    return row


class CyclicityExperiments:
    """Sweeps behind the cyclicity, Rolle and coefficient experiments"""

    def __init__(self, tol: Tolerance = DEFAULT_TOLERANCE, workers: int = 1):
        self.tol = tol
        self.workers = workers
        self.logger = logging.getLogger(__name__)

    def _accepted(self, rows: Sequence[Row]) -> List[Row]:
        return [row for row in rows if row['status'] == 'ok']

    def empirical_cyclicity(self, cfg: SweepConfig) -> SweepReport:
        """
        Largest zero count in D_delta(0) over samples from the epsilon-ball around
        the base point. The observed maximum is a lower bound for the cyclicity.
        """
        try:
            if cfg.base_point is None:
                raise ValueError("empirical_cyclicity needs a base point")
            self.logger.info(f"Sampling {cfg.samples} points around {cfg.base_point!r}")
            rows = _map_samples(partial(_perturbed_sample, cfg, self.tol), cfg.samples,
                                max(cfg.workers, self.workers))
            accepted = self._accepted(rows)
            rejected = sum(row['status'] in ('center', 'near_center') for row in rows)
            if rejected:
                self.logger.warning(f"Rejected {rejected} center or near-center samples")
            if not accepted:
                raise SweepError("Every sample was rejected: the base point lies too deep in the center set")

            best = max(accepted, key=lambda row: (row['count'], -row['index']))
            argmax = cfg.base_point.perturbed(_sample_rng(cfg.seed, best['index']), cfg.epsilon)
            report = SweepReport('empirical_cyclicity', cfg.to_dict(), rows, argmax=argmax)
            report.summary = {
                'max_count': best['count'],
                'argmax_index': best['index'],
                'accepted': len(accepted),
                'rejected': rejected,
                'errors': sum(row['status'] == 'error' for row in rows),
                'disagreements': sum(row['agreed'] is False for row in accepted),
                'cyclicity_bound': cyclicity_bound(cfg.shape),
            }
            self.logger.info(f"Observed max count {best['count']} over {len(accepted)} samples")
            return report
        except Exception as e:
            self.logger.error(f"Error in empirical_cyclicity: {str(e)}")
            raise

    def bound_conformance_sweep(self, shape: FamilyShape, samples: int, seed: int = 0,
                                radius: float = 0.1, cross_check: bool = True) -> SweepReport:
        """Zero counts in D_radius(0) for samples from the unit polydisk against c_{p,q,m}"""
        try:
            bound = cyclicity_bound(shape)
            worker = partial(_random_sample, shape, seed, radius, cross_check, self.tol)
            rows = _map_samples(worker, samples, self.workers)
            accepted = self._accepted(rows)
            violations = [row['index'] for row in accepted if row['count'] > bound]
            config = {'shape': shape.to_dict(), 'samples': samples, 'seed': seed, 'radius': radius,
                      'cross_check': cross_check}
            report = SweepReport('bound_conformance', config, rows)
            report.summary = {
                'cyclicity_bound': bound,
                'max_count': max((row['count'] for row in accepted), default=None),
                'violations': violations,
                'accepted': len(accepted),
                'errors': sum(row['status'] == 'error' for row in rows),
                'disagreements': sum(row['agreed'] is False for row in accepted),
            }
            if violations:
                self.logger.warning(f"{len(violations)} samples exceed c_{{p,q,m}} = {bound} for {shape}")
            else:
                self.logger.info(f"No sample of {shape} exceeds c_{{p,q,m}} = {bound}")
            return report
        except Exception as e:
            self.logger.error(f"Error in bound_conformance_sweep: {str(e)}")
            raise

    def coefficient_agreement(self, shape: FamilyShape, samples: int, seed: int = 0,
                              n_max: int = 20, threshold: float = 1e-9) -> SweepReport:
        """Closed-form Maclaurin coefficients against the jet expansion"""
        try:
            worker = partial(_coefficient_sample, shape, seed, n_max)
            rows = _map_samples(worker, samples, self.workers)
            for row in rows:
                row['agreed'] = row['max_relative_error'] <= threshold
            config = {'shape': shape.to_dict(), 'samples': samples, 'seed': seed, 'n_max': n_max,
                      'threshold': threshold}
            report = SweepReport('coefficient_agreement', config, rows)
            report.summary = {
                'max_relative_error': max(row['max_relative_error'] for row in rows),
                'failures': [row['index'] for row in rows if not row['agreed']],
            }
            self.logger.info(
                f"Coefficient agreement for {shape}: worst relative error "
                f"{report.summary['max_relative_error']:.3e}"
            )
            return report
        except Exception as e:
            self.logger.error(f"Error in coefficient_agreement: {str(e)}")
            raise

    def rolle_sweep(self, shape: FamilyShape, samples: int, seed: int = 0,
                    truncation: int = DEFAULT_TRUNCATION) -> SweepReport:
        """Rolle inequality and the full-Wronskian degree bound on the same random samples"""
        try:
            worker = partial(_rolle_sample, shape, seed, truncation, self.tol)
            rows = _map_samples(worker, samples, self.workers)
            accepted = self._accepted(rows)
            config = {'shape': shape.to_dict(), 'samples': samples, 'seed': seed, 'truncation': truncation}
            report = SweepReport('rolle', config, rows)
            report.summary = {
                'accepted': len(accepted),
                'rolle_violations': [row['index'] for row in accepted if not row['satisfied']],
                'degree_violations': [row['index'] for row in accepted if not row['degree_satisfied']],
                'tight': sum(row['tight'] for row in accepted),
                'errors': sum(row['status'] == 'error' for row in rows),
            }
            self.logger.info(
                f"Rolle sweep for {shape}: {len(report.summary['rolle_violations'])} Rolle and "
                f"{len(report.summary['degree_violations'])} degree violations"
            )
            return report
        except Exception as e:
            self.logger.error(f"Error in rolle_sweep: {str(e)}")
            raise

    def tightness_witnesses(self, shapes: Sequence[FamilyShape], seed: int = 0,
                            truncation: int = DEFAULT_TRUNCATION) -> SweepReport:
        """One maximal-order point per shape, checked for ord_0 f == max_I(m_I + |I| - 1)"""
        try:
            rows = [_witness_row(shape, seed, truncation, self.tol, index) for index, shape in enumerate(shapes)]
            config = {'shapes': [shape.to_dict() for shape in shapes], 'seed': seed, 'truncation': truncation}
            report = SweepReport('tightness', config, rows)
            accepted = self._accepted(rows)
            report.summary = {
                'tight': sum(row['tight'] for row in accepted),
                'not_tight': [row['index'] for row in accepted if not row['tight']],
                'errors': sum(row['status'] == 'error' for row in rows),
            }
            self.logger.info(f"Rolle bound attained for {report.summary['tight']} of {len(shapes)} shapes")
            return report
        except Exception as e:
            self.logger.error(f"Error in tightness_witnesses: {str(e)}")
            raise


def empirical_cyclicity(cfg: SweepConfig) -> SweepReport:
    return CyclicityExperiments(workers=cfg.workers).empirical_cyclicity(cfg)


def bound_conformance_sweep(shape: FamilyShape, samples: int, seed: int = 0, radius: float = 0.1,
                            workers: int = 1) -> SweepReport:
    return CyclicityExperiments(workers=workers).bound_conformance_sweep(shape, samples, seed, radius)
