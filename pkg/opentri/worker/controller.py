from concurrent.futures import ProcessPoolExecutor
from typing import List

from opentri.logger import init_logger
from opentri.report import SampleRecord
from opentri.worker.worker import SampleTask, Worker, run_batch

logger = init_logger(__name__)


class Controller:

    def __init__(
        self,
        num_workers: int = 1,
    ) -> None:
        assert num_workers >= 1
        self.num_workers = num_workers
        # A single worker runs inline, in this process.
        self.inline_worker = Worker(worker_id=0) if num_workers == 1 else None

    def execute(
        self,
        task: SampleTask,
        batches: List[List[int]],
    ) -> List[SampleRecord]:
        records: List[SampleRecord] = []
        if self.inline_worker is not None:
            for batch in batches:
                records.extend(self.inline_worker.execute_batch(task, batch))
            return records

        logger.debug(f'dispatching {len(batches)} batches to '
                     f'{self.num_workers} processes')
        with ProcessPoolExecutor(max_workers=self.num_workers) as pool:
            futures = [pool.submit(run_batch, i % self.num_workers, task,
                                   batch)
                       for i, batch in enumerate(batches)]
            for future in futures:
                records.extend(future.result())
        return records
