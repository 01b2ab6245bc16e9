import json
import logging
import os
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from src.analysis.inequalities import (CartanConfig, InequalityVerifier, RemezConfig,
                                       classical_remez_verify)
from src.analysis.zero_counter import Disk, ZeroCounter
from src.database.db_utils import ResultArchive
from src.experiments.cyclicity import CyclicityExperiments, SweepConfig, SweepReport, rolle_check
from src.experiments.reporting import SweepReporting
from src.families.exp_poly import (ExpPolyParams, center_membership, cyclicity_bound, family_jet,
                                   maclaurin_coeff, summand_jet)
from src.families.wronskian import frobenius_residual, wronskian_center_verdict, wronskian_degree_check
from src.series.jet import Tolerance, jet_order
from src.utils.config import LabSettings
from src.utils.errors import ConvergenceError, CyclabError, SchemaError
from src.utils.reports import clean_dict, complex_to_pair, pair_to_complex, save_json

COMMANDS = ('coeffs', 'rolle', 'zeros', 'sweep', 'cartan', 'remez', 'frobenius')
OUTPUT_FORMATS = ('.json', '.csv')


@dataclass(frozen=True)
class RunManifest:
    """One command-line invocation; None means "take it from the input file or the settings" """
    command: str
    input_path: str
    output_path: str
    seed: Optional[int] = None
    truncation: Optional[int] = None
    workers: Optional[int] = None
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    samples: Optional[int] = None
    H: Optional[float] = None
    d: Optional[float] = None
    R: Optional[float] = None
    c_hat: Optional[float] = None
    max_n: Optional[int] = None
    archive: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"Unknown command {self.command!r}, expected one of {', '.join(COMMANDS)}")
        if self.output_format not in OUTPUT_FORMATS:
            raise SchemaError(f"Output path must end in .json or .csv: {self.output_path}")

    @property
    def output_format(self) -> str:
        return os.path.splitext(self.output_path)[1].lower()


def _parse_params(payload: Dict[str, Any]) -> ExpPolyParams:
    """Accept bare parameters or an envelope {"params": ...}"""
    if not isinstance(payload, dict):
        raise SchemaError("Input must be a JSON object")
    return ExpPolyParams.from_dict(payload.get('params', payload))


def _pick(flag: Any, payload: Dict[str, Any], key: str, default: Any) -> Any:
    """Command-line flag, then input file, then default"""
    if flag is not None:
        return flag
    return payload.get(key, default)


class ExperimentRunner:
    def __init__(self, manifest: RunManifest, settings: Optional[LabSettings] = None):
        """Initialize the runner with a manifest and run-wide settings"""
        self.manifest = manifest
        self.settings = settings or LabSettings()
        self.tol = Tolerance(self.settings.rel_zero, self.settings.abs_floor)
        self.reporting = SweepReporting(os.path.dirname(manifest.output_path) or '.')
        self.logger = logging.getLogger(__name__)

    @property
    def truncation(self) -> int:
        return self.manifest.truncation or self.settings.truncation

    def load_input(self) -> Dict[str, Any]:
        try:
            with open(self.manifest.input_path, 'r') as json_file:
                payload = json.load(json_file)
        except json.JSONDecodeError as e:
            raise SchemaError(f"Input {self.manifest.input_path} is not valid JSON: {str(e)}")
        if not isinstance(payload, dict):
            raise SchemaError("Input must be a JSON object")
        return payload

    def run_coeffs(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        params = _parse_params(payload)
        max_n = int(_pick(self.manifest.max_n, payload, 'max_n', 10))
        jet = family_jet(params, max(max_n, 1))
        rows = []
        for n in range(max_n + 1):
            closed = maclaurin_coeff(params, n, memoize=True)
            rows.append({'n': n, 'closed_form': closed, 'jet': complex(jet.coeffs[n]),
                         'abs_diff': abs(closed - jet.coeffs[n])})
        return {
            'params': params.to_dict(),
            'cyclicity_bound': cyclicity_bound(params.shape),
            'order': jet_order(jet, self.tol),
            'center': center_membership(params, self.tol).to_dict(),
            'wronskian_center': wronskian_center_verdict(params, self.truncation, self.tol).to_dict(),
            'coefficients': rows,
        }

    def run_rolle(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        params = _parse_params(payload)
        report = rolle_check(params, self.truncation, self.tol)
        result = report.to_dict()
        result['params'] = params.to_dict()
        if not report.vacuous:
            result['wronskian_degree'] = wronskian_degree_check(params, self.truncation, self.tol).to_dict()
        return result

    def run_zeros(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        params = _parse_params(payload)
        if 'disk' in payload:
            disk = Disk.from_dict(payload['disk'])
        else:
            disk = Disk(0.0, _pick(self.manifest.delta, payload, 'radius', 0.1))
        counter = ZeroCounter()
        result = counter.count_zeros(params, disk).to_dict()
        result['params'] = params.to_dict()
        try:
            result['doubling_index'] = counter.doubling_index(params, disk.center, disk.radius)
        except ConvergenceError as e:
            self.logger.warning(f"Doubling index unavailable: {str(e)}")
            result['doubling_index'] = None
        return result

    def sweep_config(self, payload: Dict[str, Any]) -> SweepConfig:
        cfg = SweepConfig.from_dict(payload)
        overrides = {
            'seed': _pick(self.manifest.seed, payload, 'seed', self.settings.seed),
            'epsilon': self.manifest.epsilon,
            'delta': self.manifest.delta,
            'samples': self.manifest.samples,
            'workers': _pick(self.manifest.workers, payload, 'workers', self.settings.workers),
            'truncation': self.manifest.truncation,
        }
        return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})

    def run_sweep(self, payload: Dict[str, Any]) -> SweepReport:
        cfg = self.sweep_config(payload)
        experiments = CyclicityExperiments(self.tol, workers=cfg.workers)
        if cfg.base_point is None:
            report = experiments.bound_conformance_sweep(cfg.shape, cfg.samples, cfg.seed, cfg.delta,
                                                         cfg.cross_check)
        else:
            report = experiments.empirical_cyclicity(cfg)
        if self.manifest.archive:
            archive = ResultArchive(self.manifest.archive)
            run_id = archive.archive(report)
            if not archive.verify_data(run_id, len(report.rows)):
                raise CyclabError(f"Archive verification failed for run {run_id}")
        return report

    def run_cartan(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        params = _parse_params(payload)
        cfg = CartanConfig(
            H=float(_pick(self.manifest.H, payload, 'H', 1.0)),
            d=float(_pick(self.manifest.d, payload, 'd', 1.0)),
            w=pair_to_complex(payload.get('w', 0.0)),
            R=float(_pick(self.manifest.R, payload, 'R', 0.2)),
            grid=int(payload.get('grid', 64)),
            radius_factor=self.settings.radius_factor,
        )
        return InequalityVerifier(self.tol).cartan_verify(params, cfg).to_dict()

    def run_remez(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        try:
            interval = tuple(float(x) for x in payload['interval'])
            omega = tuple(tuple(float(x) for x in piece) for piece in payload['omega'])
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"Remez input needs 'interval' and 'omega' segments: {str(e)}")
        if 'coeffs' in payload:
            return classical_remez_verify(payload['coeffs'], interval, omega).to_dict()
        params = _parse_params(payload)
        cfg = RemezConfig(
            interval=interval,
            omega=omega,
            c_exponent=payload.get('c_exponent'),
            c_hat=float(_pick(self.manifest.c_hat, payload, 'c_hat', 1.0)),
            radius_factor=self.settings.radius_factor,
        )
        return InequalityVerifier(self.tol).remez_verify(params, cfg, pair_to_complex(payload.get('w', 0.0))).to_dict()

    def run_frobenius(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        """Operator built from the summand jets, applied to sum_k weights_k f_k (all ones by default)"""
        params = _parse_params(payload)
        jets = [summand_jet(params, k, self.truncation) for k in range(params.shape.m)]
        weights = [pair_to_complex(w) for w in payload.get('weights', [1.0] * params.shape.m)]
        if len(weights) != len(jets):
            raise SchemaError(f"Expected {len(jets)} weights, got {len(weights)}")
        g = weights[0] * jets[0]
        for weight, jet in zip(weights[1:], jets[1:]):
            g = g + weight * jet
        result = frobenius_residual(jets, g, self.tol).to_dict()
        result['weights'] = [complex_to_pair(w) for w in weights]
        return result

    def write(self, result: Any) -> None:
        path = self.manifest.output_path
        if isinstance(result, SweepReport):
            if self.manifest.output_format == '.csv':
                self.reporting.export_rows(result, path)
            else:
                save_json(result.to_dict(), path)
            return
        result = dict(result, command=self.manifest.command)
        if self.manifest.output_format == '.json':
            save_json(result, path)
        elif self.manifest.command == 'coeffs':
            self.reporting.export_table(result['coefficients'], path)
        else:
            self.reporting.export_table([self._csv_record(result)], path)

    @staticmethod
    def _csv_record(result: Dict[str, Any]) -> Dict[str, Any]:
        """Scalars and nested scalars only; long lists go to JSON output"""
        record: Dict[str, Any] = {}
        for key, value in clean_dict(result).items():
            if isinstance(value, list) and len(value) > 8:
                record[f"{key}_length"] = len(value)
            else:
                record[key] = json.dumps(value) if isinstance(value, list) else value
        return record

    def run(self) -> int:
        """Dispatch the manifest; 0 when the run completes, 1 when it cannot"""
        handlers = {
            'coeffs': self.run_coeffs,
            'rolle': self.run_rolle,
            'zeros': self.run_zeros,
            'sweep': self.run_sweep,
            'cartan': self.run_cartan,
            'remez': self.run_remez,
            'frobenius': self.run_frobenius,
        }
        try:
            self.logger.info(f"Running {self.manifest.command} on {self.manifest.input_path}")
            payload = self.load_input()
            result = handlers[self.manifest.command](payload)
            self.write(result)
            self.logger.info(f"{self.manifest.command} report written to {self.manifest.output_path}")
            return 0
        except (CyclabError, OSError, ValueError, ArithmeticError) as e:
            self.logger.error(f"Error in {self.manifest.command}: {str(e)}")
            return 1


def run(manifest: RunManifest, settings: Optional[LabSettings] = None) -> int:
    return ExperimentRunner(manifest, settings).run()


def build_manifest(command: str, input_path: str, output_path: str, **flags) -> RunManifest:
    return RunManifest(command, input_path, output_path, **{k: v for k, v in flags.items() if v is not None})

