"""Tests for the threaded check runner."""

import time

from utils.task_manager import TaskManager, TaskStatus


def _slow(value, delay):
    def run():
        time.sleep(delay)
        return value
    return run


def test_results_keep_submission_order():
    jobs = [(f"job{i}", _slow(i, 0.02 * (4 - i))) for i in range(5)]
    tasks = TaskManager(max_workers=3).run(jobs)
    assert [t.name for t in tasks] == [f"job{i}" for i in range(5)]
    assert [t.result for t in tasks] == list(range(5))
    assert all(t.status == TaskStatus.COMPLETED for t in tasks)
    assert all(t.elapsed is not None for t in tasks)


def test_failures_are_captured():
    def boom():
        raise RuntimeError("broken")

    tasks = TaskManager(max_workers=2).run([("ok", lambda: 1), ("bad", boom)])
    assert tasks[0].status == TaskStatus.COMPLETED
    assert tasks[1].status == TaskStatus.FAILED
    assert isinstance(tasks[1].error, RuntimeError)
    assert tasks[1].to_dict()["error"] == "broken"


def test_single_worker_and_empty_batch():
    manager = TaskManager(max_workers=0)
    assert manager.max_workers == 1
    assert manager.run([]) == []
    assert [t.result for t in manager.run([("a", lambda: "x")])] == ["x"]
