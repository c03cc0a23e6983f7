import math
import time
from typing import List, Optional

from opentri.logger import init_logger
from opentri.report import SampleStatus, VerificationReport
from opentri.worker.controller import Controller
from opentri.worker.worker import SampleTask

logger = init_logger(__name__)


class Scheduler:

    def __init__(
        self,
        controller: Controller,
        batches_per_worker: int = 4,
    ) -> None:
        self.controller = controller
        self.batches_per_worker = batches_per_worker

    def _batches(self, n: int) -> List[List[int]]:
        num_batches = self.controller.num_workers * self.batches_per_worker
        size = max(1, math.ceil(n / num_batches))
        return [list(range(start, min(start + size, n)))
                for start in range(0, n, size)]

    def run(
        self,
        check: str,
        task: SampleTask,
        n: int,
        tol: float,
        notes: Optional[List[str]] = None,
    ) -> VerificationReport:
        start = time.perf_counter()
        records = self.controller.execute(task, self._batches(n))
        # NOTE: The report sorts by sample id, so the reduction does not
        # depend on the order in which batches finish.
        report = VerificationReport(check, records, tol,
                                    runtime=time.perf_counter() - start,
                                    notes=notes)
        errors = [r.note for r in records if r.note]
        for note in sorted(set(errors)):
            report.notes.append(note)
        logger.info(
            f'{check}: {report.num_records()} samples, '
            f'{report.num_records(SampleStatus.FAILED)} failed, '
            f'min slack {report.min_slack():.3e}, '
            f'{report.runtime:.1f} s')
        return report
