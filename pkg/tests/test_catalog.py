"""Tests for the catalog store, configuration and catalog self-consistency."""

import json

import pytest

from models.report_model import EntryKind
from utils.catalog_store import (
    DEFAULT_CATALOG_DIR,
    CatalogStore,
    HamopConfig,
    catalog_get,
    get_store,
    load_time_problems,
    verify_catalog,
    verify_entry,
)
from utils.validation import CatalogConsistencyError, UnknownEntryError, ValidationError

METRIC_IDS = ["g1", "g2", "g3", "g4", "g5", "g6", "n4-stab14-a", "n4-stab14-b", "n4-stab14-c"]
SUBSPACE_IDS = ["n3-case1", "n3-case2", "n3-case3", "n3-case4", "n3-case5", "n4-generic", "n5-example"]
SYSTEM_IDS = ["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "exN-family"]
SLOW_IDS = {"ex1", "exN-family", "n5-example"}


def _write_catalog(directory, metrics):
    (directory / "metrics.json").write_text(json.dumps(metrics), encoding="utf-8")


def test_list_entries(store):
    assert [e.id for e in store.list_entries(EntryKind.METRIC)] == METRIC_IDS
    assert [e.id for e in store.list_entries(EntryKind.SUBSPACE)] == SUBSPACE_IDS
    assert [e.id for e in store.list_entries(EntryKind.SYSTEM)] == SYSTEM_IDS
    assert len(store.list_entries()) == len(METRIC_IDS + SUBSPACE_IDS + SYSTEM_IDS)


def test_get_unknown_and_malformed_ids(store):
    with pytest.raises(UnknownEntryError):
        store.get("g7")
    with pytest.raises(ValidationError):
        store.get("not an id!")


def test_builders_check_the_entry_kind(store):
    with pytest.raises(ValidationError):
        store.build_metric(store.get("n3-case4"))
    with pytest.raises(ValidationError):
        store.build_subspace(store.get("g4"))
    with pytest.raises(ValidationError):
        store.build_systems(store.get("g4"))


def test_family_entry_expands_to_sizes(store):
    bundles = store.build_systems(store.get("exN-family"))
    assert [b.system.name for b in bundles] == ["exN-family-4", "exN-family-5", "exN-family-6"]
    assert [b.metric.n for b in bundles] == [4, 5, 6]


def test_resolve_metric_variants(store, tmp_path):
    by_ref = store.resolve_metric("catalog:g4")
    inline = store.resolve_metric(by_ref.to_dict())
    path = tmp_path / "g4.json"
    path.write_text(json.dumps(by_ref.to_dict()), encoding="utf-8")
    from_file = store.resolve_metric(str(path))
    assert inline.rows == by_ref.rows
    assert from_file.rows == by_ref.rows
    assert from_file.name == "g4"
    with pytest.raises(ValidationError):
        store.resolve_metric(42)
    with pytest.raises(ValidationError):
        store.resolve_metric(str(tmp_path / "missing.json"))


def test_resolve_metric_with_parameters(store):
    g = store.resolve_metric("catalog:g1", {"c": "1"})
    assert g.free_params() == []
    symbolic = store.resolve_metric("catalog:g1", {"c": None})
    assert symbolic.free_params() == ["c"]


def test_catalog_get_uses_global_store(monkeypatch, tmp_path):
    _write_catalog(tmp_path, [{"id": "flat2", "kind": "metric",
                               "payload": {"n": 2, "g": [["1", "0"], ["0", "1"]]}}])
    monkeypatch.setenv("HAMOP_CATALOG_DIR", str(tmp_path))
    assert get_store().catalog_dir == str(tmp_path)
    assert catalog_get("flat2").kind == EntryKind.METRIC


def test_duplicate_ids_are_rejected(tmp_path):
    record = {"id": "flat2", "kind": "metric", "payload": {"n": 2, "g": [["1", "0"], ["0", "1"]]}}
    _write_catalog(tmp_path, [record, record])
    with pytest.raises(ValidationError):
        CatalogStore(str(tmp_path)).list_entries()


def test_malformed_catalog_files(tmp_path):
    (tmp_path / "metrics.json").write_text("[{", encoding="utf-8")
    with pytest.raises(ValidationError):
        CatalogStore(str(tmp_path)).list_entries()
    _write_catalog(tmp_path, [{"id": "flat2"}])
    with pytest.raises(ValidationError):
        CatalogStore(str(tmp_path)).list_entries()


def test_structural_validation_on_lookup(tmp_path):
    _write_catalog(tmp_path, [{"id": "bad", "kind": "metric", "payload": {"n": 2, "g": [["1"]]}}])
    with pytest.raises(ValidationError):
        CatalogStore(str(tmp_path)).get("bad")


def test_config_from_env(monkeypatch):
    config = HamopConfig.from_env()
    assert config.catalog_dir == DEFAULT_CATALOG_DIR
    assert config.max_workers == 3
    assert config.log_level == "WARNING"
    monkeypatch.setenv("HAMOP_MAX_WORKERS", "0")
    monkeypatch.setenv("HAMOP_LOG_LEVEL", "debug")
    config = HamopConfig.from_env()
    assert config.max_workers == 1
    assert config.log_level == "DEBUG"
    monkeypatch.setenv("HAMOP_MAX_WORKERS", "many")
    assert HamopConfig.from_env().max_workers == 3


@pytest.mark.parametrize("entry_id", [
    pytest.param(i, marks=pytest.mark.slow) if i in SLOW_IDS else i
    for i in METRIC_IDS + SUBSPACE_IDS + SYSTEM_IDS
])
def test_entry_is_self_consistent(store, entry_id):
    assert verify_entry(store.get(entry_id), store) == []


def test_verify_catalog_reports_per_entry(store):
    results = verify_catalog(store, ["g5", "n3-case5"])
    assert results == {"g5": [], "n3-case5": []}


def test_verify_entry_reports_mismatches(tmp_path):
    _write_catalog(tmp_path, [{"id": "flat2", "kind": "metric",
                               "payload": {"n": 2, "g": [["1", "0"], ["0", "1"]]},
                               "expected": {"flat": False, "hamiltonian": True}}])
    local = CatalogStore(str(tmp_path))
    problems = verify_entry(local.get("flat2"), local)
    assert len(problems) == 1
    assert "flat" in problems[0]


G1_ROWS = [
    ["u2^2 + c", "-u1*u2 - u3", "2*u2"],
    ["-u1*u2 - u3", "u1^2 + c*u3^2", "-c*u2*u3 - u1"],
    ["2*u2", "-c*u2*u3 - u1", "c*u2^2 + 1"],
]


def test_lookup_rejects_a_degenerate_classification_point(tmp_path):
    _write_catalog(tmp_path, [{"id": "g1-at-one", "kind": "metric",
                               "payload": {"n": 3, "params": ["c"], "g": G1_ROWS},
                               "expected": {"classify_at": {"c": "1"}, "segre": "[(111)111]"}}])
    local = CatalogStore(str(tmp_path))
    assert [e.id for e in local.list_entries()] == ["g1-at-one"]
    with pytest.raises(CatalogConsistencyError):
        local.get("g1-at-one")


def test_lookup_accepts_a_generic_classification_point(tmp_path):
    _write_catalog(tmp_path, [{"id": "g1-at-two", "kind": "metric",
                               "payload": {"n": 3, "params": ["c"], "g": G1_ROWS},
                               "expected": {"classify_at": {"c": "2"}, "segre": "[(111)111]"}}])
    assert CatalogStore(str(tmp_path)).get("g1-at-two").id == "g1-at-two"


def test_lookup_rejects_a_wrong_determinant(tmp_path):
    _write_catalog(tmp_path, [{"id": "flat2", "kind": "metric",
                               "payload": {"n": 2, "g": [["1", "0"], ["0", "1"]]},
                               "expected": {"det": "2"}}])
    with pytest.raises(CatalogConsistencyError):
        catalog_get("flat2", CatalogStore(str(tmp_path)))


@pytest.mark.parametrize("entry_id", METRIC_IDS + ["n3-case3", "n3-case4", "n3-case5"])
def test_shipped_entries_pass_the_lookup_gate(store, entry_id):
    assert load_time_problems(store.get(entry_id), store) == []
