"""
hamop command-line interface.

Verbs: verify, classify, solve-phi, singular, pipeline, hydro-check and
catalog list|show. Exit status 0 when every check passes, 1 when a check
fails, 2 on usage or input errors. ``--json`` prints the stable report
schema documented in docs/JSON_SCHEMA.md.
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv

from models.report_model import Report, CheckResult, CheckStatus, EntryKind
from pipeline_agent import PipelineAgent
from tools.check_tools import run_checks
from tools.diffvar import check_system, system_from_dict
from tools.exterior_grassmann import king_matrix, solve_phi
from tools.monge_metric import singular_variety
from tools.segre import classify_n3, classify_sweep, pair_normal_form, complex_from_metric
from utils.catalog_store import (
    CATALOG_REF_PREFIX,
    CatalogStore,
    HamopConfig,
    load_json_file,
    subspace_from_payload,
    verify_entry,
)
from utils.exact_linalg import matrix_rank
from utils.report_export import ReportExporter
from utils.task_manager import TaskManager
from utils.validation import (
    HamOpError,
    ValidationError,
    validate_check_list,
    validate_param_assignments,
    validate_sweep,
)

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# =============================================================================
# HELPERS
# =============================================================================

def _metric(store: CatalogStore, ref: str, values: Dict[str, Optional[str]]):
    if not ref.startswith(CATALOG_REF_PREFIX) and not os.path.exists(ref) and not ref.endswith('.json'):
        ref = CATALOG_REF_PREFIX + ref
    return store.resolve_metric(ref, values)


def _subspace(store: CatalogStore, source: str, values: Dict[str, Optional[str]]):
    if os.path.exists(source) or source.endswith('.json'):
        name = os.path.splitext(os.path.basename(source))[0]
        return subspace_from_payload(load_json_file(source), name, values)
    return store.build_subspace(store.get(source), values)


def _system_bundles(store: CatalogStore, ref: str, values: Dict[str, Optional[str]]):
    if ref.startswith(CATALOG_REF_PREFIX):
        ref = ref[len(CATALOG_REF_PREFIX):]
    if os.path.exists(ref) or ref.endswith('.json'):
        data = load_json_file(ref)
        metric = store.resolve_metric(data['metric'], values) if data.get('metric') is not None else None
        name = os.path.splitext(os.path.basename(ref))[0]
        rational_values = {k: v for k, v in values.items() if v is not None}
        return [system_from_dict(data, metric=metric, name=name, values=rational_values)]
    return store.build_systems(store.get(ref), values)


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_verify(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    checks = validate_check_list(args.checks)
    g = _metric(store, args.metric, values)
    report = Report(command="verify", inputs={'metric': args.metric, 'params': values, 'checks': checks})
    report.outputs['metric'] = g.to_dict()
    for result in run_checks(g, checks, TaskManager(config.max_workers)):
        report.add(result)
    return report


def cmd_classify(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    g = _metric(store, args.metric, values)
    report = Report(command="classify", inputs={'metric': args.metric, 'params': values})
    if args.sweep:
        grid = dict(validate_sweep(s) for s in args.sweep)
        report.inputs['sweep'] = grid
        rows = classify_sweep(g, grid)
        report.outputs['sweep'] = rows
        failed = [r for r in rows if 'error' in r]
        status = CheckStatus.FAILED if failed else CheckStatus.PASSED
        report.add(CheckResult('classify', status, details={'points': len(rows), 'errors': len(failed)}))
        return report
    classification = classify_n3(g)
    report.outputs['classification'] = classification.to_dict()
    if args.pair and classification.label is not None and g.det():
        report.outputs['pair_normal_form'] = pair_normal_form(complex_from_metric(g)).to_dict()
    status = CheckStatus.PASSED if classification.label is not None else CheckStatus.FAILED
    report.add(CheckResult('classify', status, details=classification.to_dict()))
    return report


def cmd_solve_phi(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    A, _, _ = _subspace(store, args.source, values)
    report = Report(command="solve-phi", inputs={'source': args.source, 'params': values})
    basis = solve_phi(A)
    report.outputs['king_rank'] = matrix_rank(king_matrix(A))
    report.outputs['phi_dim'] = len(basis)
    report.outputs['basis'] = [phi.to_dict()['phi'] for phi in basis]
    status = CheckStatus.PASSED if basis else CheckStatus.FAILED
    report.add(CheckResult('phi', status, witness=None if basis else "only phi = 0 is admissible"))
    return report


def cmd_singular(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    g = _metric(store, args.metric, values)
    report = Report(command="singular", inputs={'metric': args.metric, 'params': values})
    try:
        variety = singular_variety(g)
    except HamOpError as e:
        report.add(CheckResult('singular', CheckStatus.FAILED, witness=e.message))
        return report
    report.outputs['singular_variety'] = variety.to_dict()
    report.add(CheckResult('singular', CheckStatus.PASSED, details=variety.to_dict()))
    return report


def cmd_pipeline(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    agent = PipelineAgent(store, TaskManager(config.max_workers))
    agent.set_progress_callback(
        lambda phase, progress, message, activity=None: logger.info(f"[{phase} {progress:.0f}%] {message}"))
    return agent.run_pipeline(args.source, values)


def cmd_hydro_check(args, store: CatalogStore, config: HamopConfig) -> Report:
    values = validate_param_assignments(args.param)
    report = Report(command="hydro-check", inputs={'system': args.system, 'params': values})
    for bundle in _system_bundles(store, args.system, values):
        prefix = bundle.system.name
        summary = check_system(bundle)
        if summary.hamiltonian is None:
            report.add(CheckResult(f"{prefix}:hamiltonian", CheckStatus.SKIPPED,
                                   details={'reason': 'no generating metric given'}))
        else:
            status = CheckStatus.PASSED if summary.hamiltonian else CheckStatus.FAILED
            report.add(CheckResult(f"{prefix}:hamiltonian", status, witness=summary.witness))
        if summary.metric_matches is not None:
            status = CheckStatus.PASSED if summary.metric_matches else CheckStatus.FAILED
            report.add(CheckResult(f"{prefix}:operator", status))
        report.outputs[prefix] = {'system': bundle.system.to_dict(), **summary.to_dict()}
    return report


def cmd_catalog(args, store: CatalogStore, config: HamopConfig) -> Report:
    if args.action == 'list':
        kind = EntryKind(args.kind) if args.kind else None
        report = Report(command="catalog list", inputs={'kind': args.kind})
        report.outputs['entries'] = [
            {'id': e.id, 'kind': e.kind.value, 'description': e.description}
            for e in store.list_entries(kind)
        ]
        return report
    if not args.id:
        raise ValidationError("catalog show needs an entry id", "id")
    entry = store.get(args.id)
    report = Report(command="catalog show", inputs={'id': args.id, 'verify': args.verify})
    report.outputs['entry'] = entry.to_dict()
    if args.verify:
        problems = verify_entry(entry, store)
        status = CheckStatus.FAILED if problems else CheckStatus.PASSED
        report.add(CheckResult('self-consistency', status, details={'problems': problems}))
    return report


COMMANDS = {
    'verify': cmd_verify,
    'classify': cmd_classify,
    'solve-phi': cmd_solve_phi,
    'singular': cmd_singular,
    'pipeline': cmd_pipeline,
    'hydro-check': cmd_hydro_check,
    'catalog': cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--json', action='store_true', help="print the machine-readable report")
    common.add_argument('--timings', action='store_true', help="include per-check timings")
    common.add_argument('--param', action='append', default=[],
                        help="parameter assignment name=value or name=sym (repeatable)")

    parser = _Parser(prog="hamop", description="Third-order Hamiltonian operators and Monge metrics")
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)

    p = sub.add_parser('verify', parents=[common], help="run Hamiltonian checks on a metric")
    p.add_argument('--metric', required=True, help="catalog:ID, ID or metric JSON file")
    p.add_argument('--checks', default=None, help="comma-separated subset of killing,nonlin,potemin,curvature")

    p = sub.add_parser('classify', parents=[common], help="Segre type and class of a 3-component metric")
    p.add_argument('--metric', required=True)
    p.add_argument('--sweep', action='append', default=[], help="name=v1,v2,... (repeatable, cartesian grid)")
    p.add_argument('--pair', action='store_true', help="also report the pair-of-forms normal form")

    p = sub.add_parser('solve-phi', parents=[common], help="admissible forms phi for a subspace")
    p.add_argument('source', help="catalog id or subspace JSON file")

    p = sub.add_parser('singular', parents=[common], help="singular variety det g = const * S^2")
    p.add_argument('--metric', required=True)

    p = sub.add_parser('pipeline', parents=[common], help="subspace -> phi -> metric -> checks -> class")
    p.add_argument('source', help="catalog id or subspace JSON file")

    p = sub.add_parser('hydro-check', parents=[common], help="verify a hydrodynamic-type system")
    p.add_argument('--system', required=True, help="catalog:ID, ID or system JSON file")

    p = sub.add_parser('catalog', parents=[common], help="list or show catalog entries")
    p.add_argument('action', choices=['list', 'show'])
    p.add_argument('id', nargs='?')
    p.add_argument('--kind', choices=[k.value for k in EntryKind])
    p.add_argument('--verify', action='store_true', help="run the entry's full self-consistency checks")
    return parser


def cli_main(argv: Optional[List[str]] = None, out=None) -> int:
    """
    Entry point; returns the exit status.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        out: Stream for the report (defaults to stdout)
    """
    out = out or sys.stdout
    config = HamopConfig.from_env()
    logging.basicConfig(level=getattr(logging, config.log_level, logging.WARNING), stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"hamop: {e}", file=sys.stderr)
        return EXIT_USAGE
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    store = CatalogStore(config.catalog_dir)
    try:
        report = COMMANDS[args.command](args, store, config)
    except ValidationError as e:
        print(f"hamop: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except HamOpError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e.message}")
        report = Report(command=args.command)
        report.add(CheckResult(args.command, CheckStatus.ERROR, error_message=f"{type(e).__name__}: {e.message}"))

    exporter = ReportExporter(report, include_timings=args.timings)
    print(exporter.export('json' if args.json else 'text'), file=out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == '__main__':
    sys.exit(cli_main())
