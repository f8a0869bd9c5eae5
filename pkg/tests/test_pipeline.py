"""Tests for the subspace → φ → metric → checks → class pipeline."""

import json

import pytest

from models.report_model import CheckStatus
from pipeline_agent import DEGENERATE_VERDICT, PipelineAgent, run_pipeline


def test_case5_classifies_as_g5(store):
    events = []
    agent = PipelineAgent(store)
    agent.set_progress_callback(lambda phase, progress, message, activity=None: events.append((phase, progress)))
    report = agent.run_pipeline("n3-case5")
    assert report.passed
    assert [r.name for r in report.results] == ["phi", "nondegenerate", "killing", "nonlin", "singular", "classify"]
    assert report.outputs["phi_source"] == "displayed"
    assert report.outputs["classification"]["class_label"] == "g5"
    assert report.outputs["classification"]["at"]["b"] == "-1"
    assert events[0][0] == "phi"
    assert events[-1] == ("done", 100.0)


def test_case1_is_degenerate(store):
    report = run_pipeline("n3-case1", store=store)
    assert not report.passed
    result = report.result("nondegenerate")
    assert result.status == CheckStatus.FAILED
    assert result.details["verdict"] == DEGENERATE_VERDICT
    assert report.outputs["phi_source"] == "general"
    assert report.outputs["det"] == "0"


def test_n5_example_has_no_phi(store):
    report = run_pipeline("n5-example", store=store)
    assert report.result("phi").status == CheckStatus.FAILED
    assert report.outputs["king_rank"] == 15
    assert len(report.results) == 1


def test_symbolic_parameters_skip_classification(store):
    report = run_pipeline("n3-case4", {"a": None}, store=store)
    assert report.result("classify").status == CheckStatus.SKIPPED
    assert report.result("classify").passed


@pytest.mark.slow
def test_four_component_subspace_has_no_classification(store):
    report = run_pipeline("n4-generic", store=store)
    assert report.result("classify") is None
    assert report.result("killing").passed
    assert report.outputs["singular_variety"]["degree"] <= 3


def test_subspace_file(tmp_path, store):
    payload = store.get("n3-case2").payload
    path = tmp_path / "lines.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    report = run_pipeline(str(path), store=store)
    assert report.inputs["source"] == str(path)
    assert report.result("nondegenerate").status == CheckStatus.PASSED
