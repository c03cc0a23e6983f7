import csv
import json
import math
import os
import sys
from typing import Dict, List, Optional, TextIO

from opentri.logger import init_logger
from opentri.report import VerificationReport
from opentri.utils import format_float

logger = init_logger(__name__)

SAMPLES_FILE = 'samples.csv'
SUMMARY_FILE = 'summary.json'


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _json_safe(value):
    if isinstance(value, float):
        return float(format_float(value)) if math.isfinite(value) else None
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


class Frontend:

    def __init__(
        self,
        out_dir: Optional[str] = None,
        stream: Optional[TextIO] = None,
    ) -> None:
        self.out_dir = out_dir
        self.stream = stream if stream is not None else sys.stdout

    def print_line(self, line: str) -> None:
        self.stream.write(line + '\n')

    def print_value(self, value) -> None:
        self.print_line(format_value(value))

    def print_record(self, record: Dict[str, object]) -> None:
        self.print_line(' '.join(f'{key}={format_value(value)}'
                                 for key, value in record.items()))

    def print_rows(self, rows: List[Dict[str, object]]) -> None:
        if not rows:
            return
        writer = csv.DictWriter(self.stream, fieldnames=list(rows[0]),
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(v) for k, v in row.items()})

    def write_samples(self, report: VerificationReport, path: str) -> None:
        fieldnames = report.fieldnames()
        with_notes = any(record.note for record in report.records)
        if with_notes:
            fieldnames.append('note')
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames,
                                    lineterminator='\n', restval='')
            writer.writeheader()
            for record in report.records:
                row = {k: format_value(v) for k, v in record.as_row().items()}
                if with_notes:
                    row['note'] = record.note
                writer.writerow(row)

    def write_summary(self, report: VerificationReport, path: str) -> None:
        summary = {key: _json_safe(value)
                   for key, value in report.summary().items()}
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2)
            f.write('\n')

    def emit_report(self, report: VerificationReport) -> None:
        if self.out_dir is not None:
            os.makedirs(self.out_dir, exist_ok=True)
            self.write_samples(report,
                               os.path.join(self.out_dir, SAMPLES_FILE))
            self.write_summary(report,
                               os.path.join(self.out_dir, SUMMARY_FILE))
            logger.info(f'wrote {report.check} results to {self.out_dir}')
        status = 'PASS' if report.passed else 'FAIL'
        self.print_line(f'{report.check}: {status} '
                        f'n={report.num_records()} '
                        f'min_slack={format_value(report.min_slack())} '
                        f'tol={format_value(report.tol)}')
        for note in report.notes:
            self.print_line(f'note: {note}')
