import os
import logging
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class LabSettings:
    """Run-wide defaults, read from the environment (and a .env file if present)"""
    truncation: int = 64
    seed: int = 0
    workers: int = 1
    rel_zero: float = 1e-10
    abs_floor: float = 1e-300
    radius_factor: float = 0.5
    output_dir: str = 'data/output'
    log_level: str = 'INFO'

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> 'LabSettings':
        """
        Build settings from CYCLAB_* environment variables

        Args:
            dotenv_path (str, optional): Explicit .env file; the default search is used otherwise

        Returns:
            LabSettings: Settings with environment overrides applied
        """
        load_dotenv(dotenv_path)
        try:
            settings = cls(
                truncation=int(os.getenv('CYCLAB_TRUNCATION', cls.truncation)),
                seed=int(os.getenv('CYCLAB_SEED', cls.seed)),
                workers=int(os.getenv('CYCLAB_WORKERS', cls.workers)),
                rel_zero=float(os.getenv('CYCLAB_REL_ZERO', cls.rel_zero)),
                abs_floor=float(os.getenv('CYCLAB_ABS_FLOOR', cls.abs_floor)),
                radius_factor=float(os.getenv('CYCLAB_RADIUS_FACTOR', cls.radius_factor)),
                output_dir=os.getenv('CYCLAB_OUTPUT_DIR', cls.output_dir),
                log_level=os.getenv('CYCLAB_LOG_LEVEL', cls.log_level).upper(),
            )
        except ValueError as e:
            raise ValueError(f"Invalid CYCLAB_* environment value: {str(e)}")
        settings.validate()
        return settings

    def validate(self) -> None:
        if self.truncation < 1:
            raise ValueError("Truncation order must be positive")
        if self.workers < 1:
            raise ValueError("Worker count must be positive")
        if not 0 <= self.rel_zero < 1:
            raise ValueError("rel_zero must lie in [0, 1)")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be nonnegative")
        if self.radius_factor <= 0:
            raise ValueError("radius_factor must be positive")

    def with_overrides(self, **overrides) -> 'LabSettings':
        """Return a copy with every non-None override applied"""
        updated = replace(self, **{k: v for k, v in overrides.items() if v is not None})
        updated.validate()
        return updated


def setup_logging(level: str = 'INFO') -> None:
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format=LOG_FORMAT
    )
