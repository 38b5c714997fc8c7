"""
Oracle audit ledger.

Every comparison between a closed form and an independent oracle is recorded
as a CheckRecord, so a verification run can report its worst deviation per
check group and list what failed.
"""

import logging
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from .models import CheckResult, OracleSummary

logger = logging.getLogger(__name__)


@dataclass
class CheckRecord:
    """One closed-form vs oracle comparison"""
    group: str  # 'fixed_mean', 'nominal', 'malfunction', 'refinement', 'collapse', 'attainment', 'dominance', 'search', 'regulation'
    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None
    timestamp: datetime = field(default_factory=datetime.now)


class OracleAudit:
    """Collects CheckRecords for one verification run"""

    def __init__(self, name: str = "verify", seeds: Dict[str, int] = None):
        self.name = name
        self.session_id = f"audit_{int(time.time())}"
        self.seeds = dict(seeds or {})
        self.records: List[CheckRecord] = []

    def record(self, group: str, name: str, deviation: float, tolerance: float,
               detail: str = None) -> bool:
        """Log a deviation and whether it stays within tolerance (NaN always fails)"""
        deviation = float(deviation)
        passed = deviation <= tolerance
        self.records.append(CheckRecord(group=group, name=name, deviation=deviation,
                                        tolerance=tolerance, passed=passed, detail=detail))
        if not passed:
            logger.warning(f"check {group}/{name} failed: deviation {deviation:.3e} > {tolerance:.1e}"
                           + (f" ({detail})" if detail else ""))
        return passed

    def record_relative(self, group: str, name: str, value: float, reference: float,
                        tolerance: float, detail: str = None) -> bool:
        """|value - reference| / max(1, |reference|)"""
        deviation = abs(value - reference) / max(1.0, abs(reference))
        return self.record(group, name, deviation, tolerance, detail)

    def record_upper(self, group: str, name: str, value: float, ceiling: float,
                     tolerance: float, detail: str = None) -> bool:
        """Amount by which value exceeds ceiling (0 when it does not)"""
        return self.record(group, name, max(0.0, value - ceiling), tolerance, detail)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def max_deviation(self) -> Dict[str, float]:
        """Largest deviation seen in each group"""
        worst = defaultdict(float)
        for r in self.records:
            worst[r.group] = max(worst[r.group], r.deviation)
        return dict(worst)

    def count_by_group(self) -> Dict[str, int]:
        counts = defaultdict(int)
        for r in self.records:
            counts[r.group] += 1
        return dict(counts)

    def summary(self) -> OracleSummary:
        failures = [
            CheckResult(group=r.group, name=r.name, passed=r.passed,
                        deviation=r.deviation, tolerance=r.tolerance, detail=r.detail)
            for r in self.failures()
        ]
        return OracleSummary(
            name=self.name,
            passed=self.passed,
            total_checks=len(self.records),
            failed_checks=len(failures),
            max_deviation=self.max_deviation(),
            seeds=self.seeds,
            failures=failures,
        )

    def detailed_report(self) -> Dict[str, Any]:
        return {
            'session_id': self.session_id,
            'summary': self.summary().model_dump(),
            'checks_per_group': self.count_by_group(),
            'records': [asdict(r) for r in self.records],
        }
