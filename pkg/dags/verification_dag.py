import os
import sys
import logging
from datetime import datetime, timedelta
from pathlib import Path
import numpy as np
from dotenv import load_dotenv
load_dotenv()
from airflow import DAG
from airflow.operators.python_operator import PythonOperator
from airflow.models import Variable

# Add project root to Python path
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

from src.analysis.inequalities import CartanConfig, InequalityVerifier, RemezConfig
from src.database.db_utils import ResultArchive
from src.experiments.cyclicity import CyclicityExperiments
from src.experiments.reporting import SweepReporting
from src.families.exp_poly import ExpPolyParams, FamilyShape
from src.utils.config import LabSettings
from src.utils.reports import save_json

logger = logging.getLogger(__name__)

SHAPES = [FamilyShape(m, p, q) for m in (1, 2, 3) for p in (0, 1, 2) for q in (1, 2)]


def get_output_dir() -> Path:
    """Output directory from CYCLAB_OUTPUT_DIR, created if missing"""
    path = Path(LabSettings.from_env().output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_sample_count(default: int) -> int:
    try:
        return int(Variable.get("cyclab_samples"))
    except Exception as e:
        logger.info(f"Using default sample count {default} because of: {str(e)}")
        return default


def _stem(shape: FamilyShape) -> str:
    return f"m{shape.m}_p{shape.p}_q{shape.q}"


def run_coefficient_agreement(**context):
    """Closed-form coefficients against jets for every shape"""
    settings = LabSettings.from_env()
    experiments = CyclicityExperiments(workers=settings.workers)
    reporting = SweepReporting(str(get_output_dir()))
    samples = get_sample_count(100)
    failures = 0
    for shape in SHAPES:
        report = experiments.coefficient_agreement(shape, samples, settings.seed)
        reporting.export_sweep(report, f"coefficients_{_stem(shape)}")
        failures += len(report.summary['failures'])
    if failures:
        raise ValueError(f"{failures} samples disagree between closed form and jets")
    context['task_instance'].xcom_push(key='output_dir', value=str(get_output_dir()))


def run_rolle_sweep(**context):
    """Rolle inequality and Wronskian degree bound on random samples"""
    settings = LabSettings.from_env()
    experiments = CyclicityExperiments(workers=settings.workers)
    output_dir = context['task_instance'].xcom_pull(task_ids='coefficient_agreement', key='output_dir')
    if not output_dir:
        raise ValueError("Missing output_dir from coefficient_agreement task")
    reporting = SweepReporting(output_dir)
    violations = 0
    for shape in SHAPES:
        report = experiments.rolle_sweep(shape, get_sample_count(200), settings.seed, settings.truncation)
        reporting.export_sweep(report, f"rolle_{_stem(shape)}")
        violations += len(report.summary['rolle_violations']) + len(report.summary['degree_violations'])
    if violations:
        raise ValueError(f"{violations} Rolle or Wronskian degree violations")
    witnesses = experiments.tightness_witnesses(SHAPES, settings.seed, settings.truncation)
    reporting.export_sweep(witnesses, "tightness")
    if witnesses.summary['not_tight']:
        raise ValueError(f"Rolle bound not attained for shapes {witnesses.summary['not_tight']}")


def run_bound_conformance(**context):
    """Zero counts in D_0.1(0) against c_{p,q,m}, archived to sqlite"""
    settings = LabSettings.from_env()
    experiments = CyclicityExperiments(workers=settings.workers)
    output_dir = context['task_instance'].xcom_pull(task_ids='coefficient_agreement', key='output_dir')
    reporting = SweepReporting(output_dir)
    archive_path = os.path.join(output_dir, 'sweeps.db')
    archive = ResultArchive(archive_path)
    violations = 0
    for shape in SHAPES:
        report = experiments.bound_conformance_sweep(shape, get_sample_count(500), settings.seed)
        reporting.export_sweep(report, f"conformance_{_stem(shape)}")
        run_id = archive.archive(report)
        if not archive.verify_data(run_id, len(report.rows)):
            raise Exception(f"Archive verification failed for run {run_id}")
        violations += len(report.summary['violations'])
    if violations:
        raise ValueError(f"{violations} samples exceed the cyclicity bound")
    context['task_instance'].xcom_push(key='archive_path', value=archive_path)


def run_inequality_suite(**context):
    """Cartan witnesses and Remez exponents on (m=2, p=1, q=1) samples"""
    settings = LabSettings.from_env()
    output_dir = context['task_instance'].xcom_pull(task_ids='coefficient_agreement', key='output_dir')
    verifier = InequalityVerifier()
    shape = FamilyShape(2, 1, 1)
    cartan_cfg = CartanConfig(H=1.0, d=1.0, R=0.2, radius_factor=settings.radius_factor)
    remez_cfg = RemezConfig(interval=(-0.05, 0.05), omega=((-0.05, 0.0),), radius_factor=settings.radius_factor)
    samples = get_sample_count(200)
    found, attempted, exponents = 0, 0, []
    for index in range(samples):
        params = ExpPolyParams.random(shape, np.random.default_rng([settings.seed, index]))
        try:
            found += verifier.cartan_verify(params, cartan_cfg).satisfied
            attempted += 1
            exponents.append(verifier.remez_verify(params, remez_cfg).empirical_exponent)
        except Exception as e:
            logger.warning(f"Sample {index} skipped: {str(e)}")
    if not attempted:
        raise ValueError("No sample survived the Cartan check")
    summary = {
        'samples': samples,
        'skipped': samples - attempted,
        'cartan_witness_rate': found / attempted,
        'remez_max_exponent': max(exponents, default=None),
    }
    summary_path = os.path.join(output_dir, 'inequality_summary.json')
    save_json(summary, summary_path)
    if summary['cartan_witness_rate'] < 0.95:
        raise ValueError(f"Cartan witness rate {summary['cartan_witness_rate']:.2%} below 95%")
    context['task_instance'].xcom_push(key='summary_path', value=summary_path)


def export_reports(**context):
    """Export the archived conformance runs and their samples as CSV"""
    ti = context['task_instance']
    archive_path = ti.xcom_pull(task_ids='bound_conformance', key='archive_path')
    if not archive_path or not os.path.exists(archive_path):
        raise FileNotFoundError(f"Sweep archive not found at: {archive_path}")
    archive = ResultArchive(archive_path)
    output_csv = os.path.join(os.path.dirname(archive_path), 'conformance_runs.csv')
    archive.load_runs().to_csv(output_csv, index=False)
    samples_csv = os.path.join(os.path.dirname(archive_path), 'conformance_samples.csv')
    archive.load_samples().to_csv(samples_csv, index=False)
    logger.info(f"Conformance runs exported to {output_csv} and samples to {samples_csv}")


default_args = {
    'owner': 'airflow',
    'start_date': datetime(2024, 1, 1),
    'retries': 1,
    'retry_delay': timedelta(minutes=5),
}

with DAG(
    'cyclab_verification',
    default_args=default_args,
    schedule_interval=None,
    catchup=False,
) as dag:

    task_coefficient_agreement = PythonOperator(
        task_id='coefficient_agreement',
        python_callable=run_coefficient_agreement,
        provide_context=True
    )

    task_rolle_sweep = PythonOperator(
        task_id='rolle_sweep',
        python_callable=run_rolle_sweep,
        provide_context=True
    )

    task_bound_conformance = PythonOperator(
        task_id='bound_conformance',
        python_callable=run_bound_conformance,
        provide_context=True
    )

    task_inequality_suite = PythonOperator(
        task_id='inequality_suite',
        python_callable=run_inequality_suite,
        provide_context=True
    )

    task_export_reports = PythonOperator(
        task_id='export_reports',
        python_callable=export_reports,
        provide_context=True
    )

    task_coefficient_agreement >> task_rolle_sweep >> task_bound_conformance >> task_inequality_suite >> task_export_reports
