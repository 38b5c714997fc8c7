#!/usr/bin/env python3
"""
Report output
Writes analysis, sweep and verification results to an output directory
"""

import json
import logging
import os
import threading
from typing import Any, Dict, Optional

import pandas as pd
from pydantic import BaseModel

from .models import SweepResult

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """
    One row per R: R, metric_bound, worst_case_ratio, bound_ratio, then one
    column per adversary label. The two single-actuator columns are left empty
    when more than one actuator is lost.
    """
    empty = [None] * len(result.R_grid)
    columns: Dict[str, Any] = {
        'R': result.R_grid,
        'metric_bound': result.metric_bound if result.metric_bound is not None else empty,
        'worst_case_ratio': result.worst_case_ratio if result.worst_case_ratio is not None else empty,
        'bound_ratio': result.bound_ratio,
    }
    for label, curve in result.curves.items():
        columns[label] = curve
    return pd.DataFrame(columns)


class ReportStore:
    """Ordered, lock-protected writer for one output directory"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: list = []
        self._lock = threading.Lock()

    def _path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def write_json(self, filename: str, report: BaseModel, extra: Optional[Dict[str, Any]] = None) -> bool:
        """Dump a pydantic record (plus optional extra keys) as indented JSON"""
        with self._lock:
            try:
                os.makedirs(self.out_dir, exist_ok=True)
                data = report.model_dump(mode='json')
                if extra:
                    data.update(extra)
                with open(self._path(filename), 'w') as f:
                    json.dump(data, f, indent=2)
                    f.write("\n")
                self.written.append(self._path(filename))
                logger.info(f"Wrote {self._path(filename)}")
                return True
            except Exception as e:
                logger.error(f"Error writing {filename}: {e}")
                return False

    def write_sweep_csv(self, filename: str, result: SweepResult) -> bool:
        with self._lock:
            try:
                os.makedirs(self.out_dir, exist_ok=True)
                sweep_frame(result).to_csv(self._path(filename), index=False, float_format=CSV_FLOAT_FORMAT)
                self.written.append(self._path(filename))
                logger.info(f"Wrote {self._path(filename)}")
                return True
            except Exception as e:
                logger.error(f"Error writing {filename}: {e}")
                return False

    def load_json(self, filename: str) -> Optional[Dict[str, Any]]:
        try:
            with open(self._path(filename), 'r') as f:
                return json.load(f)
        except Exception as e:
            logger.error(f"Error loading {filename}: {e}")
            return None
