"""
Catalog storage for hamop.

The catalog ships as JSON data files (metrics, subspaces, hydrodynamic
systems) under ``data/catalog``; ``HAMOP_CATALOG_DIR`` points elsewhere.
Entries are validated structurally on lookup and pass a cheap consistency
gate (determinants, ranks, Segre symbols); ``verify_catalog`` runs the full
module checks on every entry.
"""

import json
import os
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Any, Set, Tuple

from dotenv import load_dotenv

from models.geometry_model import MongeMetric, SubspaceA, PhiForm
from models.report_model import CatalogEntry, EntryKind
from tools.check_tools import run_checks
from tools.diffvar import check_system, diagonalisability_ideal_check, example6_family, system_from_dict
from tools.exterior_grassmann import general_phi, king_matrix, phi_residual, solve_phi, specialize_subspace
from tools.ham_verify import curvature
from tools.monge_metric import metric_from_subspace, singular_variety
from tools.segre import classify_n3, complex_from_metric, segre_symbol
from utils.exact_linalg import matrix_rank
from utils.scalar_poly import VarTable, format_poly, parse_poly, rational, specialize
from utils.validation import (
    CatalogConsistencyError,
    HamOpError,
    ValidationError,
    UnknownEntryError,
    validate_catalog_id,
    validate_square,
)

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_CATALOG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                   "data", "catalog")
CATALOG_FILES = ("metrics.json", "subspaces.json", "systems.json")
CATALOG_REF_PREFIX = "catalog:"


@dataclass
class HamopConfig:
    """Runtime configuration read from the environment."""
    catalog_dir: str = DEFAULT_CATALOG_DIR
    max_workers: int = 3
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> 'HamopConfig':
        try:
            workers = int(os.getenv("HAMOP_MAX_WORKERS", "3"))
        except ValueError:
            logger.warning("HAMOP_MAX_WORKERS is not an integer, using 3")
            workers = 3
        return cls(
            catalog_dir=os.getenv("HAMOP_CATALOG_DIR", DEFAULT_CATALOG_DIR),
            max_workers=max(1, workers),
            log_level=os.getenv("HAMOP_LOG_LEVEL", "WARNING").upper(),
        )


def _split_values(values: Optional[Dict[str, Optional[str]]]) -> Dict[str, str]:
    """Keep rational assignments; ``None`` marks a parameter left symbolic."""
    return {k: v for k, v in (values or {}).items() if v is not None}


class CatalogStore:
    """Loads catalog files and builds typed objects from entries."""

    def __init__(self, catalog_dir: Optional[str] = None):
        self.catalog_dir = catalog_dir or HamopConfig.from_env().catalog_dir
        self._entries: Optional[Dict[str, CatalogEntry]] = None
        self._consistent: Set[str] = set()

    # -------------------------------------------------------------------------
    # loading
    # -------------------------------------------------------------------------

    def _load(self) -> Dict[str, CatalogEntry]:
        if self._entries is not None:
            return self._entries
        entries: Dict[str, CatalogEntry] = {}
        for filename in CATALOG_FILES:
            path = os.path.join(self.catalog_dir, filename)
            if not os.path.exists(path):
                logger.warning(f"Catalog file not found: {path}")
                continue
            try:
                with open(path, 'r', encoding='utf-8') as f:
                    raw = json.load(f)
            except json.JSONDecodeError as e:
                raise ValidationError(f"Catalog file {filename} is not valid JSON: {e}", "catalog")
            for item in raw:
                try:
                    entry = CatalogEntry.from_dict(item)
                except (KeyError, ValueError) as e:
                    raise ValidationError(f"Malformed catalog record in {filename}: {e}", "catalog")
                validate_catalog_id(entry.id)
                if entry.id in entries:
                    raise ValidationError(f"Duplicate catalog id '{entry.id}'", "catalog")
                entries[entry.id] = entry
        logger.info(f"Loaded {len(entries)} catalog entries from {self.catalog_dir}")
        self._entries = entries
        return entries

    def list_entries(self, kind: Optional[EntryKind] = None) -> List[CatalogEntry]:
        """Entries in file order, optionally filtered by kind."""
        entries = list(self._load().values())
        if kind is not None:
            entries = [e for e in entries if e.kind == kind]
        return entries

    def get(self, entry_id: str) -> CatalogEntry:
        """
        Look up an entry, validate its payload and run the load-time
        consistency gate (once per entry and store).

        Raises:
            UnknownEntryError: If the id is not catalogued
            ValidationError: If the payload does not parse
            CatalogConsistencyError: If the entry contradicts its expected facts
        """
        entry_id = validate_catalog_id(entry_id)
        entry = self._load().get(entry_id)
        if entry is None:
            raise UnknownEntryError(f"Unknown catalog entry '{entry_id}'", "id")
        self.validate_entry(entry)
        if entry_id not in self._consistent:
            problems = load_time_problems(entry, self)
            if problems:
                raise CatalogConsistencyError("; ".join(problems), entry_id)
            self._consistent.add(entry_id)
        return entry

    def validate_entry(self, entry: CatalogEntry):
        if entry.kind == EntryKind.METRIC:
            self.build_metric(entry)
        elif entry.kind == EntryKind.SUBSPACE:
            self.build_subspace(entry)
        elif entry.kind == EntryKind.SYSTEM:
            self.build_systems(entry)

    # -------------------------------------------------------------------------
    # builders
    # -------------------------------------------------------------------------

    def build_metric(self, entry: CatalogEntry, values: Optional[Dict[str, Optional[str]]] = None) -> MongeMetric:
        if entry.kind != EntryKind.METRIC:
            raise ValidationError(f"Entry '{entry.id}' is a {entry.kind.value}, not a metric", "id")
        metric = MongeMetric.from_dict(entry.payload, name=entry.id)
        return metric.specialize(_split_values(values))

    def resolve_metric(self, ref: Any, values: Optional[Dict[str, Optional[str]]] = None) -> MongeMetric:
        """Metric from ``catalog:ID``, an inline payload, or a JSON file path."""
        if isinstance(ref, dict):
            return MongeMetric.from_dict(ref, name="inline").specialize(_split_values(values))
        if not isinstance(ref, str):
            raise ValidationError("metric must be 'catalog:ID', a file path or an inline object", "metric")
        if ref.startswith(CATALOG_REF_PREFIX):
            return self.build_metric(self.get(ref[len(CATALOG_REF_PREFIX):]), values)
        data = load_json_file(ref)
        name = os.path.splitext(os.path.basename(ref))[0]
        return MongeMetric.from_dict(data, name=name).specialize(_split_values(values))

    def build_subspace(self, entry: CatalogEntry,
                       values: Optional[Dict[str, Optional[str]]] = None) -> Tuple[SubspaceA, Optional[PhiForm], str]:
        """
        Returns:
            (subspace, displayed φ or None, pairing)
        """
        if entry.kind != EntryKind.SUBSPACE:
            raise ValidationError(f"Entry '{entry.id}' is a {entry.kind.value}, not a subspace", "id")
        return subspace_from_payload(entry.payload, entry.id, values)

    def build_systems(self, entry: CatalogEntry, values: Optional[Dict[str, Optional[str]]] = None) -> List[Any]:
        """HydroBundles of a system entry (several for a family entry)."""
        if entry.kind != EntryKind.SYSTEM:
            raise ValidationError(f"Entry '{entry.id}' is a {entry.kind.value}, not a system", "id")
        payload = entry.payload
        if payload.get('family') == 'example6':
            sizes = payload.get('sizes', [])
            if not isinstance(sizes, list) or not sizes:
                raise ValidationError("family entries need a non-empty 'sizes' list", "sizes")
            payloads = [(f"{entry.id}-{n}", example6_family(n)) for n in sizes]
        else:
            payloads = [(entry.id, payload)]
        bundles = []
        for name, data in payloads:
            ref = data.get('metric', data.get('metric_inline'))
            metric = self.resolve_metric(ref, values) if ref is not None else None
            bundles.append(system_from_dict(data, metric=metric, name=name, values=_split_values(values)))
        return bundles


def subspace_from_payload(payload: Dict[str, Any], name: str = "",
                          values: Optional[Dict[str, Optional[str]]] = None) -> Tuple[SubspaceA, Optional[PhiForm], str]:
    """Subspace file payload → (SubspaceA, displayed φ or None, pairing)."""
    A = SubspaceA.from_dict(payload, name=name)
    values = _split_values(values)
    A = specialize_subspace(A, values)
    pairing = payload.get('pairing', 'trace')
    phi = None
    if payload.get('phi') is not None:
        raw = payload['phi']
        params = raw.get('params', []) if isinstance(raw, dict) else []
        rows = raw.get('rows') if isinstance(raw, dict) else raw
        validate_square(rows, "phi", size=A.n)
        vt = VarTable.for_coords(A.n, params)
        phi = PhiForm.from_rows(rows, vt)
        subs = [(vt.index(k), rational(v)) for k, v in values.items() if k in params and v is not None]
        if subs:
            phi = PhiForm(vt, [[e.subs(subs) for e in r] for r in phi.rows])
    return A, phi, pairing


def load_json_file(path: str) -> Any:
    """
    Read a JSON input file.

    Raises:
        ValidationError: If the file is missing or not valid JSON
    """
    if not os.path.exists(path):
        raise ValidationError(f"File not found: {path}", "file")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}", "file")


# Global store instance
_store = None


def get_store() -> CatalogStore:
    """Get or create the global catalog store."""
    global _store
    if _store is None:
        _store = CatalogStore()
    return _store


def reset_store():
    global _store
    _store = None


def catalog_get(entry_id: str, store: Optional[CatalogStore] = None) -> CatalogEntry:
    """Deep-validated catalog entry by id."""
    return (store or get_store()).get(entry_id)


# =============================================================================
# SELF-CONSISTENCY
# =============================================================================

def load_time_problems(entry: CatalogEntry, store: CatalogStore) -> List[str]:
    """
    Cheap expectation checks run on lookup.

    Metrics: det, degeneracy and the Segre symbol at the classification
    point. Subspaces: King rank and det of the displayed φ. Hamiltonian
    flows of systems are left to ``verify_entry``.
    """
    expected = entry.expected
    problems: List[str] = []
    if entry.kind == EntryKind.METRIC:
        g = store.build_metric(entry)
        if 'det' in expected and g.det() != parse_poly(expected['det'], g.vt):
            problems.append(f"{entry.id}: det mismatch")
        if 'degenerate' in expected and expected['degenerate'] != (not g.det()):
            problems.append(f"{entry.id}: degenerate expected {expected['degenerate']}")
        if 'segre' in expected and g.n == 3:
            point = g.specialize(expected.get('classify_at', {}))
            if not point.det():
                problems.append(f"{entry.id}: degenerate at {expected.get('classify_at', {})}")
            else:
                symbol = str(segre_symbol(complex_from_metric(point)))
                if symbol != expected['segre']:
                    problems.append(f"{entry.id}: segre expected {expected['segre']}, got {symbol}")
    elif entry.kind == EntryKind.SUBSPACE:
        A, phi, pairing = store.build_subspace(entry)
        if 'king_rank' in expected and matrix_rank(king_matrix(A)) != expected['king_rank']:
            problems.append(f"{entry.id}: king_rank mismatch")
        if phi is not None and 'det' in expected:
            g = metric_from_subspace(A, phi, pairing=pairing)
            if g.det() != parse_poly(expected['det'], g.vt):
                problems.append(f"{entry.id}: det mismatch")
    if problems:
        logger.warning(f"Catalog entry '{entry.id}' fails the load-time gate: {problems}")
    return problems

def _verify_metric(store: CatalogStore, entry: CatalogEntry, expect) -> List[str]:
    expected = entry.expected
    problems = []
    g = store.build_metric(entry)
    if 'det' in expected and g.det() != parse_poly(expected['det'], g.vt):
        problems.append(f"{entry.id}: det mismatch")
    if expected.get('degenerate'):
        expect('degenerate', not g.det())
        return problems
    results = run_checks(g, ['killing', 'nonlin', 'potemin'])
    expect('hamiltonian', all(r.passed for r in results))
    if 'flat' in expected or 'conformally_flat' in expected:
        report = curvature(g)
        expect('flat', report.flat)
        if report.conformally_flat is not None:
            expect('conformally_flat', report.conformally_flat)
    if 'surface' in expected:
        expect('surface', format_poly(singular_variety(g).surface))
    if 'class' in expected:
        c = classify_n3(g.specialize(expected.get('classify_at', {})))
        expect('class', c.label.value if c.label else None)
        expect('segre', str(c.symbol) if c.symbol else None)
    return problems


def _verify_subspace(store: CatalogStore, entry: CatalogEntry, expect) -> List[str]:
    expected = entry.expected
    problems = []
    A, phi, pairing = store.build_subspace(entry)
    expect('king_rank', matrix_rank(king_matrix(A)))
    expect('phi_dim', len(solve_phi(A)))
    if 'king_rank_at' in expected:
        special, _, _ = store.build_subspace(entry, expected['king_rank_at'])
        expect('king_rank_special', matrix_rank(king_matrix(special)))
        expect('phi_dim_special', len(solve_phi(special)))
    if phi is not None:
        if not phi_residual(A, phi).is_zero():
            problems.append(f"{entry.id}: displayed phi violates the King condition")
        g = metric_from_subspace(A, phi, pairing=pairing)
        if 'det' in expected and g.det() != parse_poly(expected['det'], g.vt):
            problems.append(f"{entry.id}: det mismatch")
    if expected.get('degenerate'):
        general, _ = general_phi(A)
        expect('degenerate', not metric_from_subspace(A, general, pairing=pairing).det())
    points = expected.get('classify_points', [])
    if not points and 'classify_at' in expected:
        points = [{'params': expected['classify_at'], 'class': expected.get('class')}]
    for point in points:
        A_p, phi_p, _ = store.build_subspace(entry, point['params'])
        if phi_p is None:
            general, _ = general_phi(A_p)
            values = {k: rational(v) for k, v in point["params"].items()}
            phi_p = PhiForm(general.vt, [[specialize(e, values) for e in r] for r in general.rows])
        c = classify_n3(metric_from_subspace(A_p, phi_p, pairing=pairing))
        actual = c.label.value if c.label else None
        if actual != point.get('class'):
            problems.append(f"{entry.id}: class at {point['params']} expected {point.get('class')}, got {actual}")
    return problems


def verify_entry(entry: CatalogEntry, store: Optional[CatalogStore] = None) -> List[str]:
    """
    Run the module checks an entry's ``expected`` block asks for.

    Returns:
        Mismatch descriptions (empty when the entry is self-consistent)
    """
    store = store or get_store()
    problems: List[str] = []

    def expect(key: str, actual: Any):
        if key in entry.expected and entry.expected[key] != actual:
            problems.append(f"{entry.id}: {key} expected {entry.expected[key]!r}, got {actual!r}")

    try:
        if entry.kind == EntryKind.METRIC:
            problems.extend(_verify_metric(store, entry, expect))
        elif entry.kind == EntryKind.SUBSPACE:
            problems.extend(_verify_subspace(store, entry, expect))
        elif entry.kind == EntryKind.SYSTEM:
            for bundle in store.build_systems(entry):
                result = check_system(bundle)
                expect('hamiltonian', result.hamiltonian)
                expect('linearly_degenerate', result.linearly_degenerate)
                expect('diagonalisable_generic', result.diagonalisable_generic)
                if 'diagonalisability_ideal' in entry.expected:
                    generator = bundle.ring.parse(entry.expected['diagonalisability_ideal'])
                    ideal = diagonalisability_ideal_check(bundle.system, generator)
                    if not ideal.passed:
                        problems.append(f"{entry.id}: diagonalisability ideal: {ideal.witness}")
                if bundle.displayed is not None:
                    expect('metric_matches', result.metric_matches)
    except HamOpError as e:
        problems.append(f"{entry.id}: {type(e).__name__}: {e.message}")
    return problems


def verify_catalog(store: Optional[CatalogStore] = None, ids: Optional[List[str]] = None) -> Dict[str, List[str]]:
    """
    Full self-consistency sweep.

    Returns:
        Mapping id → mismatch descriptions, for every checked entry
    """
    store = store or get_store()
    entries = [store.get(i) for i in ids] if ids else store.list_entries()
    results = {}
    for entry in entries:
        results[entry.id] = verify_entry(entry, store)
        if results[entry.id]:
            logger.warning(f"verify_catalog: {entry.id} has {len(results[entry.id])} mismatches")
    return results
