"""
Pipeline Agent - runs the subspace → φ → metric → checks → classification chain.

Given a subspace of bivectors (catalog id or JSON file), the agent solves the
King condition for φ, builds the Monge metric, verifies the Hamiltonian
conditions, factors the singular variety and, for three components,
classifies the metric. Every phase adds results to one Report.
"""

import logging
import os
from typing import Dict, Any, Optional, Callable

from models.geometry_model import PhiForm, SubspaceA
from models.report_model import Report, CheckResult, CheckStatus, EntryKind
from tools.check_tools import run_checks
from tools.exterior_grassmann import (
    general_phi,
    king_matrix,
    phi_residual,
    solve_phi,
)
from tools.monge_metric import metric_from_subspace, singular_variety, determinantal_locus
from tools.segre import classify_n3
from utils.catalog_store import CatalogStore, get_store, load_json_file, subspace_from_payload
from utils.exact_linalg import matrix_rank
from utils.scalar_poly import format_poly, rational, specialize
from utils.task_manager import TaskManager
from utils.validation import HamOpError, ValidationError, validate_catalog_id

logger = logging.getLogger(__name__)

PHASES = ('phi', 'metric', 'checks', 'singular', 'classify')

DEGENERATE_VERDICT = "degenerate metric; no non-trivial Hamiltonian operator"


class PipelineAgent:
    """Runs the construction pipeline for one subspace."""

    def __init__(self, store: Optional[CatalogStore] = None, manager: Optional[TaskManager] = None):
        self.store = store or get_store()
        self.manager = manager or TaskManager(max_workers=1)
        self.progress_callback = None

    def set_progress_callback(self, callback: Callable):
        """Set a callback function to receive progress updates."""
        self.progress_callback = callback

    def _report_progress(self, phase: str, progress: float, message: str, activity: str = None):
        if self.progress_callback:
            self.progress_callback(phase, progress, message, activity)

    # -------------------------------------------------------------------------
    # inputs
    # -------------------------------------------------------------------------

    def _load_source(self, source: str, values: Dict[str, Optional[str]]):
        """(subspace, displayed φ, pairing, expected block) from a catalog id or file."""
        if os.path.exists(source) or source.endswith('.json'):
            payload = load_json_file(source)
            name = os.path.splitext(os.path.basename(source))[0]
            A, phi, pairing = subspace_from_payload(payload, name, values)
            return A, phi, pairing, {}
        entry = self.store.get(validate_catalog_id(source))
        if entry.kind != EntryKind.SUBSPACE:
            raise ValidationError(f"'{source}' is a {entry.kind.value}, not a subspace", "source")
        A, phi, pairing = self.store.build_subspace(entry, values)
        return A, phi, pairing, entry.expected

    @staticmethod
    def _specialize_phi(phi: PhiForm, values: Dict[str, Optional[str]]) -> PhiForm:
        points = {k: rational(v) for k, v in values.items() if v is not None and k in phi.vt.params}
        if not points:
            return phi
        return PhiForm(phi.vt, [[specialize(e, points) for e in r] for r in phi.rows])

    # -------------------------------------------------------------------------
    # pipeline
    # -------------------------------------------------------------------------

    def run_pipeline(self, source: str, values: Optional[Dict[str, Optional[str]]] = None) -> Report:
        """
        Run every phase on a subspace.

        Args:
            source: Catalog id (e.g. "n3-case5") or path of a subspace JSON file
            values: Parameter assignments; None marks a parameter kept symbolic

        Returns:
            Report with one result per phase that ran
        """
        values = dict(values or {})
        report = Report(command="pipeline", inputs={'source': source, 'params': values})
        A, displayed, pairing, expected = self._load_source(source, values)
        logger.info(f"Pipeline started for subspace '{A.name}' (n={A.n})")

        # Phase 1: admissible φ
        self._report_progress('phi', 10.0, 'Solving the King condition...', f"n={A.n}")
        rank = matrix_rank(king_matrix(A))
        basis = solve_phi(A)
        report.outputs['king_rank'] = rank
        report.outputs['phi_dim'] = len(basis)
        if not basis:
            report.add(CheckResult('phi', CheckStatus.FAILED, witness="only phi = 0 is admissible",
                                   details={'king_rank': rank}))
            self._report_progress('phi', 100.0, 'No admissible phi', 'Pipeline stopped')
            return report
        phi = None
        if displayed is not None and phi_residual(A, displayed).is_zero():
            phi = displayed
            report.outputs['phi_source'] = 'displayed'
        else:
            if displayed is not None:
                logger.warning(f"Displayed phi of '{A.name}' is not admissible, using the general solution")
            phi, _ = general_phi(A)
            report.outputs['phi_source'] = 'general'
        phi = self._specialize_phi(phi, values)
        report.outputs['phi'] = phi.to_dict()
        report.add(CheckResult('phi', CheckStatus.PASSED, details={'king_rank': rank, 'phi_dim': len(basis)}))

        # Phase 2: metric
        self._report_progress('metric', 30.0, 'Building the Monge metric...', f"pairing={pairing}")
        g = metric_from_subspace(A, phi, pairing=pairing)
        delta = g.det()
        report.outputs['metric'] = g.to_dict()
        report.outputs['det'] = format_poly(delta)
        if not delta:
            report.add(CheckResult('nondegenerate', CheckStatus.FAILED, witness="det g = 0",
                                   details={'verdict': DEGENERATE_VERDICT}))
            logger.info(f"Pipeline: '{A.name}' gives a degenerate metric")
            return report
        report.add(CheckResult('nondegenerate', CheckStatus.PASSED))

        # Phase 3: Hamiltonian conditions
        self._report_progress('checks', 50.0, 'Verifying the Hamiltonian conditions...')
        for result in run_checks(g, ['killing', 'nonlin'], self.manager):
            report.add(result)

        # Phase 4: singular variety
        self._report_progress('singular', 70.0, 'Factoring the singular variety...')
        try:
            variety = singular_variety(g)
            report.outputs['singular_variety'] = variety.to_dict()
            report.outputs['determinantal_locus'] = format_poly(determinantal_locus(A))
            report.add(CheckResult('singular', CheckStatus.PASSED, details=variety.to_dict()))
        except HamOpError as e:
            report.add(CheckResult('singular', CheckStatus.FAILED, witness=e.message))

        # Phase 5: classification
        if A.n == 3:
            self._report_progress('classify', 90.0, 'Classifying the metric...')
            self._classify(report, A, phi, pairing, values, expected)

        self._report_progress('done', 100.0, 'Pipeline completed', f"passed={report.passed}")
        return report

    def _classify(self, report: Report, A: SubspaceA, phi: PhiForm, pairing: str,
                  values: Dict[str, Optional[str]], expected: Dict[str, Any]):
        point = {}
        if any(k in phi.vt.params for k in _free_params(phi)):
            point = {k: v for k, v in expected.get('classify_at', {}).items() if k not in values}
            phi = self._specialize_phi(phi, point)
        g = metric_from_subspace(A, phi, pairing=pairing)
        if g.free_params():
            report.add(CheckResult('classify', CheckStatus.SKIPPED,
                                   details={'reason': f"parameters {g.free_params()} are symbolic"}))
            return
        try:
            classification = classify_n3(g)
        except HamOpError as e:
            report.add(CheckResult('classify', CheckStatus.ERROR, error_message=e.message))
            return
        details = classification.to_dict()
        if point:
            details['at'] = point
        report.outputs['classification'] = details
        report.add(CheckResult('classify', CheckStatus.PASSED, details=details))


def _free_params(phi: PhiForm):
    used = set()
    for row in phi.rows:
        for e in row:
            for monom in e.monoms():
                used.update(i for i, k in enumerate(monom) if k)
    names = phi.vt.names
    return [names[i] for i in sorted(used) if names[i] in phi.vt.params]


def run_pipeline(source: str, values: Optional[Dict[str, Optional[str]]] = None,
                 store: Optional[CatalogStore] = None, manager: Optional[TaskManager] = None) -> Report:
    """Convenience wrapper around ``PipelineAgent.run_pipeline``."""
    return PipelineAgent(store, manager).run_pipeline(source, values)
