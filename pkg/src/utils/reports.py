import json
import math
import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def complex_to_pair(value: complex) -> List[float]:
    """Serialize a complex scalar as [re, im]"""
    value = complex(value)
    return [clean_float(value.real), clean_float(value.imag)]


def pair_to_complex(pair: Any) -> complex:
    """Parse [re, im] (or a bare real number) into a complex scalar"""
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"Expected a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def clean_float(value: Any) -> Any:
    """Clean float values to ensure JSON compatibility"""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def clean_dict(d: Any) -> Any:
    """Recursively clean a report payload so json.dump accepts it"""
    if isinstance(d, dict):
        return {str(k): clean_dict(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [clean_dict(v) for v in d]
    if isinstance(d, (complex, np.complexfloating)):
        return complex_to_pair(d)
    return clean_float(d)


def save_json(payload: Dict[str, Any], output_path: str) -> None:
    """Write a report as canonical JSON (sorted keys, fixed indent)"""
    try:
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output_path, 'w') as json_file:
            json.dump(clean_dict(payload), json_file, indent=2, sort_keys=True)
            json_file.write('\n')
        logger.info(f"Report saved to {output_path}")
    except Exception as e:
        logger.error(f"Error saving report to {output_path}: {str(e)}")
        raise


@dataclass
class InequalityReport:
    """Both sides of a checked inequality, in the orientation lhs <= rhs unless noted"""
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    empirical_exponent: Optional[float] = None
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        """rhs - lhs for upper bounds, lhs - rhs for lower bounds; positive when satisfied"""
        if self.details.get('orientation') == 'lower':
            return self.lhs - self.rhs
        return self.rhs - self.lhs

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            'name': self.name,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'margin': self.margin,
            'satisfied': bool(self.satisfied),
            'details': self.details,
        }
        if self.empirical_exponent is not None:
            payload['empirical_exponent'] = self.empirical_exponent
        if self.witness is not None:
            payload['witness'] = self.witness
        return clean_dict(payload)


def complex_list(values: Sequence[complex]) -> List[List[float]]:
    return [complex_to_pair(v) for v in values]
