import logging
import os
from typing import Any, Dict, List

import pandas as pd

from src.experiments.cyclicity import SweepReport
from src.utils.reports import clean_dict, save_json


def _flatten(payload: Dict[str, Any], prefix: str = '') -> Dict[str, Any]:
    """Nested dicts become dotted column names; lists stay as cell values"""
    flat: Dict[str, Any] = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


class SweepReporting:
    def __init__(self, output_dir: str = 'data/output'):
        """Initialize with the directory that receives exported reports"""
        self.output_dir = output_dir
        self.logger = logging.getLogger(__name__)

    def _ensure_parent(self, output_path: str) -> None:
        parent = os.path.dirname(output_path)
        if parent:
            os.makedirs(parent, exist_ok=True)

    def rows_frame(self, report: SweepReport) -> pd.DataFrame:
        """One row per sample: index, parameter hash, count, residual, status and extras"""
        frame = pd.DataFrame([clean_dict(row) for row in report.rows])
        if 'index' in frame.columns:
            frame = frame.sort_values('index').reset_index(drop=True)
        return frame

    def histogram_frame(self, report: SweepReport) -> pd.DataFrame:
        histogram = report.histogram
        return pd.DataFrame({'count': list(histogram.keys()), 'samples': list(histogram.values())})

    def export_rows(self, report: SweepReport, output_path: str) -> None:
        """Export per-sample rows to CSV for plotting"""
        try:
            self._ensure_parent(output_path)
            frame = self.rows_frame(report)
            frame.to_csv(output_path, index=False)
            self.logger.info(f"Exported {len(frame)} {report.kind} rows to {output_path}")
        except Exception as e:
            self.logger.error(f"Error exporting sweep rows: {str(e)}")
            raise

    def export_histogram(self, report: SweepReport, output_path: str) -> None:
        try:
            self._ensure_parent(output_path)
            self.histogram_frame(report).to_csv(output_path, index=False)
            self.logger.info(f"Histogram exported to {output_path}")
        except Exception as e:
            self.logger.error(f"Error exporting histogram: {str(e)}")
            raise

    def export_table(self, records: List[Dict[str, Any]], output_path: str) -> None:
        """Export flat records (single reports or coefficient tables) to CSV"""
        try:
            self._ensure_parent(output_path)
            frame = pd.DataFrame([_flatten(clean_dict(record)) for record in records])
            frame.to_csv(output_path, index=False)
            self.logger.info(f"Exported {len(frame)} records to {output_path}")
        except Exception as e:
            self.logger.error(f"Error exporting table: {str(e)}")
            raise

    def export_sweep(self, report: SweepReport, stem: str) -> Dict[str, str]:
        """Write <stem>.json, <stem>_rows.csv and, for counting sweeps, <stem>_histogram.csv"""
        try:
            paths = {
                'json': os.path.join(self.output_dir, f"{stem}.json"),
                'rows': os.path.join(self.output_dir, f"{stem}_rows.csv"),
            }
            self._ensure_parent(paths['json'])
            save_json(report.to_dict(), paths['json'])
            self.export_rows(report, paths['rows'])
            if report.histogram:
                paths['histogram'] = os.path.join(self.output_dir, f"{stem}_histogram.csv")
                self.export_histogram(report, paths['histogram'])
            return paths
        except Exception as e:
            self.logger.error(f"Error exporting sweep {stem}: {str(e)}")
            raise
