import enum
import math
from typing import Dict, List, Optional


class SampleStatus(enum.Enum):
    PASSED = enum.auto()
    FAILED = enum.auto()


class SampleRecord:

    def __init__(
        self,
        sample_id: int,
        values: Dict[str, float],
        slacks: Dict[str, float],
        note: str = '',
    ) -> None:
        self.sample_id = sample_id
        # Inputs, measured and model quantities, in column order.
        self.values = values
        # Signed margins: a sample passes when every slack is >= -tol.
        self.slacks = slacks
        self.note = note

    def min_slack(self) -> float:
        if not self.slacks:
            return math.inf
        return min(self.slacks.values())

    def status(self, tol: float) -> SampleStatus:
        if self.min_slack() >= -tol:
            return SampleStatus.PASSED
        return SampleStatus.FAILED

    def as_row(self) -> Dict[str, float]:
        row: Dict[str, float] = {'id': self.sample_id}
        row.update(self.values)
        row.update(self.slacks)
        return row

    def __repr__(self) -> str:
        return (f'SampleRecord(sample_id={self.sample_id}, '
                f'min_slack={self.min_slack():.3e})')


class VerificationReport:

    def __init__(
        self,
        check: str,
        records: List[SampleRecord],
        tol: float,
        runtime: float = 0.0,
        notes: Optional[List[str]] = None,
    ) -> None:
        self.check = check
        self.records = sorted(records, key=lambda record: record.sample_id)
        self.tol = tol
        self.runtime = runtime
        self.notes = notes if notes is not None else []

    def min_slack(self) -> float:
        if not self.records:
            return math.inf
        return min(record.min_slack() for record in self.records)

    @property
    def passed(self) -> bool:
        return self.min_slack() >= -self.tol

    def num_records(self, status: Optional[SampleStatus] = None) -> int:
        if status is None:
            return len(self.records)
        return len([r for r in self.records if r.status(self.tol) == status])

    def failed_records(self) -> List[SampleRecord]:
        return [r for r in self.records
                if r.status(self.tol) == SampleStatus.FAILED]

    def fieldnames(self) -> List[str]:
        names: List[str] = []
        for record in self.records:
            for key in record.as_row():
                if key not in names:
                    names.append(key)
        return names

    def summary(self) -> Dict[str, object]:
        min_slack = self.min_slack()
        return {
            'check': self.check,
            'n': len(self.records),
            'min_slack': None if math.isinf(min_slack) else min_slack,
            'tol': self.tol,
            'pass': self.passed,
            'notes': list(self.notes),
        }

    def __repr__(self) -> str:
        return (f'VerificationReport(check={self.check}, '
                f'n={len(self.records)}, '
                f'min_slack={self.min_slack():.3e}, '
                f'passed={self.passed})')
