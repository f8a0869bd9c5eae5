"""
Named metric checks for hamop.

Each check wraps one verification from ``tools.ham_verify`` behind a common
interface so the CLI and the pipeline can select checks by name
(``--checks killing,nonlin``) and run them on the check runner.

Checks:
- KillingCheck: linear Killing-type system
- NonlinearCheck: quadratic second-order system
- PoteminCheck: the c-object formulation
- CurvatureCheck: Riemann / Cotton diagnostics (informational, never fails)
"""

import logging
from abc import ABC, abstractmethod
from typing import List, Optional

from models.geometry_model import MongeMetric
from models.report_model import Verdict, CheckResult, CheckStatus
from tools.ham_verify import check_killing, check_nonlinear, check_potemin_system, curvature
from utils.task_manager import TaskManager
from utils.validation import HamOpError, validate_check_list

logger = logging.getLogger(__name__)


class BaseCheck(ABC):
    """Abstract base class for all metric checks."""

    @abstractmethod
    def name(self) -> str:
        pass

    @abstractmethod
    def description(self) -> str:
        pass

    @abstractmethod
    def execute(self, g: MongeMetric) -> Verdict:
        pass


class KillingCheck(BaseCheck):
    def name(self) -> str:
        return "killing"

    def description(self) -> str:
        return "g_{mk,n} + g_{kn,m} + g_{mn,k} = 0"

    def execute(self, g: MongeMetric) -> Verdict:
        return check_killing(g)


class NonlinearCheck(BaseCheck):
    def name(self) -> str:
        return "nonlin"

    def description(self) -> str:
        return "quadratic second-order conditions with g^{pq} cleared by det g"

    def execute(self, g: MongeMetric) -> Verdict:
        return check_nonlinear(g)


class PoteminCheck(BaseCheck):
    def name(self) -> str:
        return "potemin"

    def description(self) -> str:
        return "conditions on g^{ij} and c^{ij}_k (symmetry, skewness, cyclicity, quadratic relation)"

    def execute(self, g: MongeMetric) -> Verdict:
        return check_potemin_system(g)


class CurvatureCheck(BaseCheck):
    """Reports flatness and, for n = 3, conformal flatness; the verdict always passes."""

    def name(self) -> str:
        return "curvature"

    def description(self) -> str:
        return "Riemann tensor, and Cotton tensor when n = 3"

    def execute(self, g: MongeMetric) -> Verdict:
        report = curvature(g)
        return Verdict(True, None, report.to_dict())


ALL_CHECKS = [
    KillingCheck,
    NonlinearCheck,
    PoteminCheck,
    CurvatureCheck,
]


def get_checks(names: Optional[List[str]] = None) -> List[BaseCheck]:
    """Instances of the named checks, in registry order; all checks when ``names`` is empty."""
    checks = [check_class() for check_class in ALL_CHECKS]
    if not names:
        return checks
    wanted = set(names)
    return [c for c in checks if c.name() in wanted]


def _result_from_task(task) -> CheckResult:
    if task.error is not None:
        error = task.error
        message = error.message if isinstance(error, HamOpError) else str(error)
        result = CheckResult(name=task.name, status=CheckStatus.ERROR,
                             error_message=f"{type(error).__name__}: {message}")
    else:
        result = CheckResult.from_verdict(task.name, task.result)
    result.execution_time = task.elapsed
    return result


def run_checks(g: MongeMetric, names: Optional[List[str]] = None,
               manager: Optional[TaskManager] = None) -> List[CheckResult]:
    """
    Run the selected checks on ``g`` concurrently.

    Args:
        g: Metric to verify
        names: Check names (subset of KNOWN_CHECKS); all when None
        manager: Check runner; a single-worker runner when None

    Returns:
        One CheckResult per check, in registry order
    """
    checks = get_checks(validate_check_list(",".join(names)) if names else None)
    manager = manager or TaskManager(max_workers=1)
    tasks = manager.run([(c.name(), (lambda c=c: c.execute(g))) for c in checks])
    results = [_result_from_task(t) for t in tasks]
    failed = [r.name for r in results if not r.passed]
    logger.info(f"run_checks: metric '{g.name}' ran {len(results)} checks, failed={failed}")
    return results
