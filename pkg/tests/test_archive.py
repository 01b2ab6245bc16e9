import json

import pytest

from src.database.db_utils import ResultArchive
from src.experiments.cyclicity import SweepReport


@pytest.fixture
def report():
    rows = [{'index': i, 'hash': f"h{i}", 'count': i % 2, 'residual': 1e-6, 'agreed': True, 'status': 'ok'}
            for i in range(5)]
    rows.append({'index': 5, 'hash': 'h5', 'count': None, 'residual': None, 'agreed': None, 'status': 'center'})
    config = {'shape': {'m': 2, 'p': 1, 'q': 1}, 'samples': 6, 'seed': 3, 'radius': 0.1, 'cross_check': True}
    return SweepReport('bound_conformance', config, rows, summary={'violations': [], 'max_count': 1})


@pytest.fixture
def archive(tmp_path):
    return ResultArchive(str(tmp_path / 'sweeps.db'))


class TestResultArchive:
    def test_archive_and_verify(self, archive, report):
        run_id = archive.archive(report)
        assert run_id == ResultArchive.run_id(report)
        assert archive.verify_data(run_id, 6)
        assert not archive.verify_data(run_id, 7)

    def test_samples_round_trip(self, archive, report):
        run_id = archive.archive(report)
        samples = archive.load_samples(run_id)
        assert list(samples['sample_index']) == list(range(6))
        assert list(samples['status']) == ['ok'] * 5 + ['center']
        assert samples['count'].isna().sum() == 1

    def test_runs_table(self, archive, report):
        archive.archive(report)
        runs = archive.load_runs()
        assert len(runs) == 1
        assert runs.loc[0, 'kind'] == 'bound_conformance'
        assert json.loads(runs.loc[0, 'shape']) == {'m': 2, 'p': 1, 'q': 1}
        assert json.loads(runs.loc[0, 'summary'])['max_count'] == 1

    def test_rearchiving_replaces_run(self, archive, report):
        first = archive.archive(report)
        second = archive.archive(report)
        assert first == second
        assert len(archive.load_runs()) == 1
        assert len(archive.load_samples()) == 6

    def test_distinct_configs_get_distinct_runs(self, archive, report):
        other = SweepReport(report.kind, dict(report.config, seed=4), report.rows, report.summary)
        assert archive.archive(report) != archive.archive(other)
        assert len(archive.load_runs()) == 2

    def test_unknown_run(self, archive, report):
        archive.archive(report)
        assert not archive.verify_data('missing', 6)
