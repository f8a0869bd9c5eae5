"""Tests for the Hamiltonian condition systems, curvature and projective pullbacks."""

import random

import pytest

from models.geometry_model import MongeMetric, ProjectiveMap
from tests.helpers import catalog_metric
from tools.ham_verify import (
    check_killing,
    check_nonlinear,
    check_potemin_system,
    curvature,
    pullback_metric,
    random_projective_map,
)
from utils.exact_linalg import matrices_equal
from utils.scalar_poly import coord_degree
from utils.validation import DimensionMismatchError, SingularMetricError

CANONICAL = ["g1", "g2", "g3", "g4", "g5", "g6"]


@pytest.mark.parametrize("entry_id", CANONICAL)
def test_canonical_metrics_are_hamiltonian(store, entry_id):
    g = store.build_metric(store.get(entry_id))
    for check in (check_killing, check_nonlinear, check_potemin_system):
        verdict = check(g)
        assert verdict.passed, f"{check.__name__}: {verdict.witness}"


def test_killing_failure_has_witness():
    g = MongeMetric.from_dict({"n": 2, "g": [["u1^2", "0"], ["0", "1"]]})
    verdict = check_killing(g)
    assert not verdict.passed
    assert verdict.witness == "6*u1"
    assert verdict.details["indices"] == "111"


def test_nonlinear_failure():
    # complex of rank 3 > n
    g = MongeMetric.from_dict({"n": 2, "g": [["u2^2 + 1", "-u1*u2"], ["-u1*u2", "u1^2 + 1"]]})
    assert check_killing(g).passed
    assert not check_nonlinear(g).passed


def test_singular_metric_raises():
    g = MongeMetric.from_dict({"n": 2, "g": [["1", "1"], ["1", "1"]]})
    with pytest.raises(SingularMetricError):
        check_nonlinear(g)
    with pytest.raises(SingularMetricError):
        curvature(g)


@pytest.mark.parametrize("entry_id", ["g4", "g5", "g6"])
def test_flat_metrics(store, entry_id):
    report = curvature(catalog_metric(store, entry_id))
    assert report.flat
    assert report.conformally_flat
    assert report.riemann == {}


@pytest.mark.parametrize("entry_id", ["g1", "g2", "g3"])
def test_non_conformally_flat_metrics(store, entry_id):
    report = curvature(store.build_metric(store.get(entry_id)))
    assert not report.flat
    assert report.conformally_flat is False
    assert report.cotton


def test_identity_pullback(store):
    g = catalog_metric(store, "g2")
    assert pullback_metric(g, ProjectiveMap.identity(3)).rows == g.rows


def test_affine_pullback_of_constant_metric(store):
    g = catalog_metric(store, "g6")
    T = random_projective_map(3, random.Random(7), affine=True)
    assert T.is_affine()
    h = pullback_metric(g, T)
    assert check_killing(h).passed
    assert all(coord_degree(e, h.vt) <= 0 for row in h.rows for e in row)


def test_pullback_dimension_mismatch(store):
    with pytest.raises(DimensionMismatchError):
        pullback_metric(catalog_metric(store, "g6"), ProjectiveMap.identity(2))


def test_map_inverse_composes_to_identity():
    T = random_projective_map(3, random.Random(11))
    assert matrices_equal(T.compose(T.inverse()).matrix, ProjectiveMap.identity(3).matrix)


@pytest.mark.parametrize("entry_id", ["g2", "g5"])
def test_pullback_respects_composition(store, entry_id):
    g = catalog_metric(store, entry_id)
    rng = random.Random(97)
    first = random_projective_map(3, rng)
    second = random_projective_map(3, rng)
    stepwise = pullback_metric(pullback_metric(g, first), second)
    direct = pullback_metric(g, second.compose(first))
    assert stepwise.rows == direct.rows


def test_pullback_by_inverse_restores_metric(store):
    g = catalog_metric(store, "g4")
    T = random_projective_map(3, random.Random(5))
    assert pullback_metric(pullback_metric(g, T), T.inverse()).rows == g.rows
