"""
Check runner for hamop.

Runs the independent checks of a Report on a small pool of worker threads.
Every check is a pure function of its inputs, so the only synchronisation is
result collection; results come back in submission order so reports stay
identical across runs.
"""

import threading
import queue
import time
import logging
from typing import Dict, Any, Optional, Callable, List
from dataclasses import dataclass
from enum import Enum

logger = logging.getLogger(__name__)


class TaskStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class Task:
    """One queued check."""
    index: int
    name: str
    func: Callable[[], Any]
    status: TaskStatus = TaskStatus.PENDING
    result: Any = None
    error: Optional[BaseException] = None
    elapsed: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'name': self.name,
            'status': self.status.value,
            'error': str(self.error) if self.error else None,
            'elapsed': self.elapsed,
        }


class TaskManager:
    """Runs batches of checks on ``max_workers`` threads."""

    def __init__(self, max_workers: int = 3):
        self.max_workers = max(1, int(max_workers))

    def _worker(self, task_queue: "queue.Queue[Optional[Task]]"):
        while True:
            task = task_queue.get()
            if task is None:
                task_queue.task_done()
                break
            self._execute_task(task)
            task_queue.task_done()

    def _execute_task(self, task: Task):
        task.status = TaskStatus.RUNNING
        start = time.perf_counter()
        try:
            task.result = task.func()
            task.status = TaskStatus.COMPLETED
        except Exception as e:
            task.error = e
            task.status = TaskStatus.FAILED
            logger.debug(f"Task {task.name} raised {type(e).__name__}: {e}")
        finally:
            task.elapsed = time.perf_counter() - start
            logger.debug(f"Task {task.name} finished with status {task.status.value} in {task.elapsed:.3f}s")

    def run(self, jobs: List[tuple]) -> List[Task]:
        """
        Execute ``(name, callable)`` pairs.

        Args:
            jobs: Checks to run; each callable takes no arguments

        Returns:
            The finished tasks, in the order they were submitted
        """
        tasks = [Task(index=i, name=name, func=func) for i, (name, func) in enumerate(jobs)]
        if not tasks:
            return []
        if self.max_workers == 1 or len(tasks) == 1:
            for task in tasks:
                self._execute_task(task)
            return tasks

        task_queue: "queue.Queue[Optional[Task]]" = queue.Queue()
        for task in tasks:
            task_queue.put(task)
        workers = []
        for i in range(min(self.max_workers, len(tasks))):
            task_queue.put(None)
            worker = threading.Thread(target=self._worker, args=(task_queue,), name=f"CheckWorker-{i}")
            worker.daemon = True
            worker.start()
            workers.append(worker)
        for worker in workers:
            worker.join()
        logger.info(f"Ran {len(tasks)} checks on {len(workers)} workers")
        return sorted(tasks, key=lambda t: t.index)
