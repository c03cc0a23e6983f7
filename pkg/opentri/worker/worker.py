from typing import Any, Callable, Dict, List, NamedTuple

from opentri.errors import (GluingError, IntegrationError, NoGeodesicError,
                            SamplingError, UnrealizableTriangleError,
                            WindowExitError)
from opentri.logger import init_logger
from opentri.report import SampleRecord

logger = init_logger(__name__)

# Numerical failures that spoil one sample but not the run.
_SAMPLE_ERRORS = (
    GluingError,
    IntegrationError,
    NoGeodesicError,
    SamplingError,
    UnrealizableTriangleError,
    WindowExitError,
)


class SampleTask(NamedTuple):
    # fn(subject, params, sample_id, **context) -> SampleRecord
    fn: Callable[..., SampleRecord]
    subject: Any
    params: Any
    context: Dict[str, Any]


class Worker:

    def __init__(
        self,
        worker_id: int,
    ) -> None:
        self.worker_id = worker_id
        self.num_executed = 0

    def execute_sample(
        self,
        task: SampleTask,
        sample_id: int,
    ) -> SampleRecord:
        try:
            record = task.fn(task.subject, task.params, sample_id,
                             **task.context)
        except _SAMPLE_ERRORS as e:
            logger.warning(f'worker {self.worker_id}: sample {sample_id} '
                           f'failed: {e}')
            record = SampleRecord(sample_id, {},
                                  {'slack_error': float('-inf')},
                                  note=f'{type(e).__name__}: {e}')
        self.num_executed += 1
        return record

    def execute_batch(
        self,
        task: SampleTask,
        sample_ids: List[int],
    ) -> List[SampleRecord]:
        return [self.execute_sample(task, i) for i in sample_ids]


def run_batch(
    worker_id: int,
    task: SampleTask,
    sample_ids: List[int],
) -> List[SampleRecord]:
    """Entry point of a pool process."""
    return Worker(worker_id).execute_batch(task, sample_ids)
