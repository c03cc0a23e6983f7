import math

import numpy as np
import pytest

from opentri.report import SampleRecord, SampleStatus, VerificationReport
from opentri.utils import Counter, clamped_arccos, format_float, sample_rng


def test_record_status() -> None:
    record = SampleRecord(3, {'a': 1.0}, {'slack_x': -1e-7, 'slack_y': 0.2})
    assert record.min_slack() == -1e-7
    assert record.status(1e-6) == SampleStatus.PASSED
    assert record.status(1e-8) == SampleStatus.FAILED
    assert record.as_row() == {'id': 3, 'a': 1.0, 'slack_x': -1e-7,
                               'slack_y': 0.2}


def test_report_pass_flag() -> None:
    records = [SampleRecord(1, {}, {'slack': 0.5}),
               SampleRecord(0, {}, {'slack': -2e-6})]
    report = VerificationReport('demo', records, 1e-6)
    assert [r.sample_id for r in report.records] == [0, 1]
    assert report.min_slack() == -2e-6
    assert not report.passed
    assert report.num_records(SampleStatus.FAILED) == 1
    assert report.failed_records()[0].sample_id == 0
    assert VerificationReport('demo', records, 1e-5).passed


def test_empty_report() -> None:
    report = VerificationReport('demo', [], 1e-6, notes=['nothing to do'])
    assert report.passed
    summary = report.summary()
    assert summary['min_slack'] is None
    assert summary['pass'] is True
    assert summary['notes'] == ['nothing to do']


def test_fieldnames_keep_order() -> None:
    records = [SampleRecord(0, {'a': 1.0}, {'slack_a': 0.0}),
               SampleRecord(1, {'a': 1.0, 'b': 2.0}, {'slack_a': 0.0})]
    report = VerificationReport('demo', records, 1e-6)
    assert report.fieldnames() == ['id', 'a', 'slack_a', 'b']


@pytest.mark.parametrize('x, expected', [
    (4.0, '4.0'),
    (1.0 / 3.0, '0.333333333333'),
    (3.999999999999999, '4.0'),
    (-2.5e-8, '-2.5e-08'),
    (math.inf, 'inf'),
])
def test_format_float(x: float, expected: str) -> None:
    assert format_float(x) == expected


def test_clamped_arccos() -> None:
    assert clamped_arccos(1.0 + 1e-15) == 0.0
    assert clamped_arccos(-1.0 - 1e-15) == math.pi


def test_sample_rng_streams() -> None:
    a = sample_rng(7, 3).uniform(size=4)
    b = sample_rng(7, 3).uniform(size=4)
    c = sample_rng(7, 4).uniform(size=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_counter() -> None:
    counter = Counter(start=2)
    assert next(counter) == 2
    assert next(counter) == 3
    counter.reset()
    assert next(counter) == 0
