import hashlib
import json
import logging
import sqlite3
from typing import Optional

import pandas as pd

from src.database.schema import ARCHIVE_TABLES, get_schema
from src.experiments.cyclicity import SweepReport
from src.utils.reports import clean_dict


class ResultArchive:
    def __init__(self, db_path: str):
        """Initialize the archive with its sqlite database path"""
        self.db_path = db_path
        self.logger = logging.getLogger(__name__)

    def create_schema(self) -> None:
        """Create the archive tables if they don't exist"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                statements = [stmt.strip() for stmt in get_schema().split(';') if 'CREATE TABLE' in stmt]
                for statement in statements:
                    conn.execute(statement)
                    table_name = statement[statement.find('EXISTS') + 7:].split()[0]
                    self.logger.info(f"Created table: {table_name}")
                conn.commit()
        except Exception as e:
            self.logger.error(f"Error in create_schema: {str(e)}")
            raise

    @staticmethod
    def run_id(report: SweepReport) -> str:
        """Content hash of kind and configuration; re-archiving a run replaces it"""
        encoded = json.dumps({'kind': report.kind, 'config': clean_dict(report.config)}, sort_keys=True)
        return hashlib.sha256(encoded.encode()).hexdigest()[:16]

    def archive(self, report: SweepReport) -> str:
        """Store a sweep and its samples, returning the run id"""
        try:
            self.create_schema()
            run_id = self.run_id(report)
            config = clean_dict(report.config)
            with sqlite3.connect(self.db_path) as conn:
                conn.execute('DELETE FROM sweep_samples WHERE run_id = ?', (run_id,))
                conn.execute('DELETE FROM sweep_runs WHERE run_id = ?', (run_id,))
                conn.execute(
                    'INSERT INTO sweep_runs (run_id, kind, shape, seed, samples, config, summary) '
                    'VALUES (?, ?, ?, ?, ?, ?, ?)',
                    (
                        run_id,
                        report.kind,
                        json.dumps(config.get('shape'), sort_keys=True),
                        int(config.get('seed', 0)),
                        len(report.rows),
                        json.dumps(config, sort_keys=True),
                        json.dumps(clean_dict(report.summary), sort_keys=True),
                    ),
                )
                samples = pd.DataFrame([
                    {
                        'run_id': run_id,
                        'sample_index': row['index'],
                        'param_hash': row['hash'],
                        'count': row.get('count'),
                        'residual': row.get('residual'),
                        'status': row['status'],
                    }
                    for row in report.rows
                ], columns=['run_id', 'sample_index', 'param_hash', 'count', 'residual', 'status'])
                samples.to_sql('sweep_samples', conn, if_exists='append', index=False)
                conn.commit()
            self.logger.info(f"Archived {report.kind} run {run_id} with {len(report.rows)} samples")
            return run_id
        except Exception as e:
            self.logger.error(f"Error archiving sweep: {str(e)}")
            raise

    def load_samples(self, run_id: Optional[str] = None) -> pd.DataFrame:
        try:
            with sqlite3.connect(self.db_path) as conn:
                if run_id is None:
                    return pd.read_sql_query('SELECT * FROM sweep_samples ORDER BY run_id, sample_index', conn)
                return pd.read_sql_query(
                    'SELECT * FROM sweep_samples WHERE run_id = ? ORDER BY sample_index', conn, params=(run_id,)
                )
        except Exception as e:
            self.logger.error(f"Error in load_samples: {str(e)}")
            raise

    def load_runs(self) -> pd.DataFrame:
        try:
            with sqlite3.connect(self.db_path) as conn:
                return pd.read_sql_query('SELECT * FROM sweep_runs ORDER BY run_id', conn)
        except Exception as e:
            self.logger.error(f"Error in load_runs: {str(e)}")
            raise

    def verify_data(self, run_id: str, expected_samples: int) -> bool:
        """Check that the archived sample count matches the run"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                counts = {}
                for table in ARCHIVE_TABLES:
                    column = 'samples' if table == 'sweep_runs' else 'COUNT(*)'
                    query = f"SELECT {column} as count FROM {table} WHERE run_id = ?"
                    result = pd.read_sql_query(query, conn, params=(run_id,))
                    counts[table] = int(result.iloc[0]['count']) if not result.empty else 0
            match = counts['sweep_runs'] == expected_samples == counts['sweep_samples']
            self.logger.info(
                f"Run {run_id}: declared={counts['sweep_runs']}, stored={counts['sweep_samples']}, "
                f"expected={expected_samples}, Match={'✓' if match else '✗'}"
            )
            return match
        except Exception as e:
            self.logger.error(f"Error in verify_data: {str(e)}")
            raise
