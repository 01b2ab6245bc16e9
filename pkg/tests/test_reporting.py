import json
import math

import numpy as np
import pandas as pd
import pytest

from src.experiments.cyclicity import SweepReport
from src.experiments.reporting import SweepReporting
from src.utils.reports import (InequalityReport, clean_dict, complex_to_pair, pair_to_complex,
                               save_json)


@pytest.fixture
def counting_report():
    rows = [
        {'index': 2, 'hash': 'c', 'count': 1, 'residual': 1e-6, 'agreed': True, 'status': 'ok', 'radius': 0.1},
        {'index': 0, 'hash': 'a', 'count': 2, 'residual': 2e-6, 'agreed': True, 'status': 'ok', 'radius': 0.1},
        {'index': 1, 'hash': 'b', 'count': None, 'residual': None, 'agreed': None, 'status': 'center'},
        {'index': 3, 'hash': 'd', 'count': 1, 'residual': 5e-7, 'agreed': False, 'status': 'ok', 'radius': 0.1},
    ]
    config = {'shape': {'m': 1, 'p': 2, 'q': 1}, 'seed': 7, 'samples': 4}
    return SweepReport('empirical_cyclicity', config, rows, summary={'max_count': 2, 'accepted': 3})


@pytest.fixture
def coefficient_report():
    rows = [{'index': i, 'hash': str(i), 'max_relative_error': 1e-15 * i, 'status': 'ok', 'agreed': True}
            for i in range(3)]
    return SweepReport('coefficient_agreement', {'shape': {'m': 2, 'p': 1, 'q': 1}, 'seed': 0}, rows)


class TestSerialization:
    def test_complex_pairs(self):
        assert complex_to_pair(1 - 2j) == [1.0, -2.0]
        assert pair_to_complex([1, -2]) == 1 - 2j
        assert pair_to_complex(0.5) == 0.5

    def test_bad_pair(self):
        with pytest.raises(ValueError):
            pair_to_complex([1, 2, 3])

    def test_clean_dict(self):
        cleaned = clean_dict({1: np.float64(0.5), 'z': 1j, 'bad': math.nan, 'big': math.inf,
                              'n': np.int64(3), 'flag': np.bool_(True), 'xs': (1.0, 2j)})
        assert cleaned == {'1': 0.5, 'z': [0.0, 1.0], 'bad': None, 'big': 'inf', 'n': 3, 'flag': True,
                           'xs': [1.0, [0.0, 2.0]]}

    def test_save_json_is_canonical(self, tmp_path):
        path = tmp_path / 'nested' / 'report.json'
        save_json({'b': 1, 'a': [1j]}, str(path))
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith('\n')
        assert json.loads(text) == {'a': [[0.0, 1.0]], 'b': 1}

    def test_inequality_margin(self):
        upper = InequalityReport('remez', lhs=1.0, rhs=3.0, satisfied=True)
        lower = InequalityReport('cartan', lhs=1.0, rhs=0.25, satisfied=True, details={'orientation': 'lower'})
        assert upper.margin == 2.0
        assert lower.margin == 0.75
        assert 'empirical_exponent' not in upper.to_dict()
        assert lower.to_dict()['margin'] == 0.75


class TestSweepReporting:
    def test_histogram(self, counting_report):
        assert counting_report.histogram == {1: 2, 2: 1}

    def test_rows_frame_sorted(self, counting_report):
        frame = SweepReporting().rows_frame(counting_report)
        assert list(frame['index']) == [0, 1, 2, 3]
        assert list(frame['hash']) == ['a', 'b', 'c', 'd']

    def test_export_sweep(self, tmp_path, counting_report):
        paths = SweepReporting(str(tmp_path)).export_sweep(counting_report, 'z2_exp_z')
        assert set(paths) == {'json', 'rows', 'histogram'}
        payload = json.loads((tmp_path / 'z2_exp_z.json').read_text())
        assert payload['histogram'] == {'1': 2, '2': 1}
        rows = pd.read_csv(paths['rows'])
        assert len(rows) == 4
        histogram = pd.read_csv(paths['histogram'])
        assert list(histogram['count']) == [1, 2]
        assert list(histogram['samples']) == [2, 1]

    def test_export_without_counts(self, tmp_path, coefficient_report):
        paths = SweepReporting(str(tmp_path)).export_sweep(coefficient_report, 'coefficients')
        assert 'histogram' not in paths
        assert 'histogram' not in json.loads((tmp_path / 'coefficients.json').read_text())

    def test_export_table_flattens(self, tmp_path):
        path = tmp_path / 'out' / 'report.csv'
        SweepReporting(str(tmp_path)).export_table(
            [{'name': 'remez', 'details': {'c': 3, 'phi': 5.8}, 'lhs': 1.0}], str(path))
        frame = pd.read_csv(path)
        assert set(frame.columns) == {'name', 'details.c', 'details.phi', 'lhs'}
        assert frame.loc[0, 'details.c'] == 3
