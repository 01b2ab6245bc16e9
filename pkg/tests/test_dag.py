import json
import os

import pandas as pd
import pytest

pytest.importorskip("airflow")

from dags import verification_dag  # noqa: E402
from src.families.exp_poly import FamilyShape  # noqa: E402


class FakeTaskInstance:
    """Minimal XCom store keyed by (task_id, key)"""

    def __init__(self, task_id: str = ''):
        self.task_id = task_id
        self.store = {}

    def xcom_push(self, key, value):
        self.store[(self.task_id, key)] = value

    def xcom_pull(self, task_ids, key):
        return self.store.get((task_ids, key))


@pytest.fixture
def small_dag(monkeypatch, tmp_path):
    monkeypatch.setenv('CYCLAB_OUTPUT_DIR', str(tmp_path))
    monkeypatch.setattr(verification_dag, 'SHAPES', [FamilyShape(1, 1, 1), FamilyShape(2, 1, 1)])
    monkeypatch.setattr(verification_dag, 'get_sample_count', lambda default: 4)
    return tmp_path


def test_task_chain():
    dag = verification_dag.dag
    assert dag.dag_id == 'cyclab_verification'
    chain = ['coefficient_agreement', 'rolle_sweep', 'bound_conformance', 'inequality_suite', 'export_reports']
    assert set(dag.task_ids) == set(chain)
    for upstream, downstream in zip(chain, chain[1:]):
        assert dag.get_task(upstream).downstream_task_ids == {downstream}


def test_pipeline_on_small_shapes(small_dag):
    ti = FakeTaskInstance()
    for task_id, callable_ in [
        ('coefficient_agreement', verification_dag.run_coefficient_agreement),
        ('rolle_sweep', verification_dag.run_rolle_sweep),
        ('bound_conformance', verification_dag.run_bound_conformance),
        ('inequality_suite', verification_dag.run_inequality_suite),
        ('export_reports', verification_dag.export_reports),
    ]:
        ti.task_id = task_id
        callable_(task_instance=ti)

    assert os.path.exists(small_dag / 'coefficients_m2_p1_q1.json')
    assert os.path.exists(small_dag / 'rolle_m1_p1_q1_rows.csv')
    with open(small_dag / 'tightness.json') as json_file:
        assert json.load(json_file)['summary']['not_tight'] == []
    assert os.path.exists(small_dag / 'sweeps.db')
    with open(small_dag / 'inequality_summary.json') as json_file:
        summary = json.load(json_file)
    assert summary['samples'] == 4
    assert summary['cartan_witness_rate'] >= 0.95
    assert os.path.exists(small_dag / 'conformance_runs.csv')
    samples = pd.read_csv(small_dag / 'conformance_samples.csv')
    assert len(samples) == 4 * len(verification_dag.SHAPES)
    assert set(samples.columns) >= {'run_id', 'sample_index', 'count', 'status'}


def test_export_needs_archive(small_dag):
    with pytest.raises(FileNotFoundError):
        verification_dag.export_reports(task_instance=FakeTaskInstance('export_reports'))
