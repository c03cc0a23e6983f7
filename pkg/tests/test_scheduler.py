import json

import pytest

from opentri.errors import IntegrationError, NoGeodesicError, SamplingError
from opentri.master.frontend import Frontend, format_value
from opentri.master.scheduler import Scheduler
from opentri.report import SampleRecord, VerificationReport
from opentri.worker.controller import Controller
from opentri.worker.worker import SampleTask, Worker


def _square_sample(subject, params, sample_id: int,
                   shift: float = 0.0) -> SampleRecord:
    return SampleRecord(sample_id, {'x': float(sample_id)},
                        {'slack': subject * sample_id ** 2 + shift})


def _failing_sample(subject, params, sample_id: int) -> SampleRecord:
    if sample_id == 1:
        raise NoGeodesicError('shooting did not converge', {'id': sample_id})
    if sample_id == 2:
        raise SamplingError('no non-degenerate triangle after 50 draws.')
    if sample_id == 3:
        raise IntegrationError('integration failed on [0.0, 1.0]')
    return SampleRecord(sample_id, {}, {'slack': 0.0})


def test_batches_cover_all_ids() -> None:
    scheduler = Scheduler(Controller(2), batches_per_worker=2)
    batches = scheduler._batches(10)
    assert len(batches) == 4
    assert sum(batches, []) == list(range(10))


@pytest.mark.parametrize('num_workers', [1, 2])
def test_scheduler_reduces_in_id_order(num_workers: int) -> None:
    task = SampleTask(_square_sample, 1.0, None, {'shift': 0.5})
    report = Scheduler(Controller(num_workers)).run('squares', task, 7, 1e-6)
    assert [r.sample_id for r in report.records] == list(range(7))
    assert report.min_slack() == 0.5
    assert report.passed


def test_worker_records_numerical_failures() -> None:
    worker = Worker(worker_id=0)
    task = SampleTask(_failing_sample, None, None, {})
    records = worker.execute_batch(task, [0, 1, 2, 3])
    assert worker.num_executed == 4
    assert records[0].min_slack() == 0.0
    for record, name in zip(records[1:], ['NoGeodesicError', 'SamplingError',
                                          'IntegrationError']):
        assert record.min_slack() == float('-inf')
        assert record.note.startswith(name)
    report = Scheduler(Controller(1)).run('failing', task, 3, 1e-6)
    assert not report.passed
    assert any('NoGeodesicError' in note for note in report.notes)


def test_frontend_files(tmp_path) -> None:
    records = [SampleRecord(0, {'a': 1.0 / 3.0}, {'slack': 0.0}),
               SampleRecord(1, {'a': 2.0}, {'slack': -1.0}, note='bad')]
    report = VerificationReport('demo', records, 1e-6, notes=['numerical'])
    Frontend(out_dir=str(tmp_path)).emit_report(report)
    lines = (tmp_path / 'samples.csv').read_text().splitlines()
    assert lines == ['id,a,slack,note', '0,0.333333333333,0.0,',
                     '1,2.0,-1.0,bad']
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary == {'check': 'demo', 'n': 2, 'min_slack': -1.0,
                       'tol': 1e-06, 'pass': False, 'notes': ['numerical']}


@pytest.mark.parametrize('value, expected', [
    (True, 'true'),
    (3, '3'),
    (0.1 + 0.2, '0.3'),
    ('x', 'x'),
])
def test_format_value(value, expected: str) -> None:
    assert format_value(value) == expected
