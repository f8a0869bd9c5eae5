"""Tests for Segre symbols, discriminants and the class labels of three-component metrics."""

import random

import pytest

from models.geometry_model import ClassLabel, ComplexForm, MongeMetric
from tests.helpers import catalog_metric, catalog_subspace
from tools.ham_verify import pullback_metric, random_projective_map
from tools.monge_metric import metric_from_subspace
from tools.segre import (
    c_invariants,
    classify_n3,
    classify_sweep,
    complex_from_metric,
    discriminants,
    omega_n3,
    pair_normal_form,
    segre_symbol,
)
from utils.exact_linalg import det_fraction_free, matrix_rows, rational_matrix, to_rational_matrix
from utils.scalar_poly import coord_degree
from utils.validation import (
    DimensionMismatchError,
    NotHamiltonianError,
    ParametricInputError,
    ValidationError,
)

SYMBOLS = [
    ("g1", {"c": 2}, "[(111)111]"),
    ("g2", {}, "[(111)12]"),
    ("g3", {}, "[11(112)]"),
    ("g4", {}, "[(114)]"),
    ("g5", {}, "[(123)]"),
    ("g6", {}, "[(222)]"),
]


@pytest.mark.parametrize("entry_id, values, symbol", SYMBOLS)
def test_canonical_segre_symbols(store, entry_id, values, symbol):
    Q = complex_from_metric(catalog_metric(store, entry_id, **values))
    assert str(segre_symbol(Q)) == symbol
    invariants = c_invariants(Q)
    assert invariants["rank_C"] == 3
    assert invariants["trace_C"] == "0"


@pytest.mark.parametrize("entry_id, values, symbol", SYMBOLS)
def test_canonical_labels(store, entry_id, values, symbol):
    classification = classify_n3(catalog_metric(store, entry_id, **values))
    assert classification.label == ClassLabel(entry_id)
    assert str(classification.symbol) == symbol
    assert classification.to_dict()["class_label"] == entry_id


def test_classify_requires_three_components(store):
    g = catalog_metric(store, "n4-stab14-a")
    with pytest.raises(DimensionMismatchError):
        classify_n3(g)


def test_classify_requires_specialized_parameters(store):
    with pytest.raises(ParametricInputError):
        classify_n3(store.build_metric(store.get("g1")))


def test_classify_degenerate_metric():
    g = MongeMetric.from_dict({"n": 3, "g": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "0"]]})
    assert classify_n3(g).label == ClassLabel.DEGENERATE


def test_classify_rejects_non_hamiltonian():
    g = MongeMetric.from_dict({"n": 3, "g": [["u1^2 + 1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]})
    with pytest.raises(NotHamiltonianError):
        classify_n3(g)


def test_case4_discriminant_separates_g1_from_g2(store):
    points = store.get("n3-case4").expected["classify_points"]
    labels = set()
    for point in points:
        A, phi, pairing = catalog_subspace(store, "n3-case4", **point["params"])
        g = metric_from_subspace(A, phi, pairing=pairing)
        classification = classify_n3(g)
        disc = classification.discriminants
        assert classification.label == ClassLabel(point["class"])
        if point["class"] == "g2":
            assert not disc.discriminant
            assert disc.mu or disc.nu
        else:
            assert disc.discriminant
        labels.add(classification.label)
    assert labels == {ClassLabel.G1, ClassLabel.G2}


def test_symbolic_discriminants(store):
    g = store.build_metric(store.get("g1"))
    disc = discriminants(complex_from_metric(g))
    assert disc.discriminant == disc.mu ** 2 * 27 + disc.nu ** 3
    assert coord_degree(disc.mu, g.vt) <= 0
    assert coord_degree(disc.nu, g.vt) <= 0
    assert discriminants(complex_from_metric(catalog_metric(store, "g1", c=2))).discriminant


def test_classify_sweep(store):
    rows = classify_sweep(store.build_metric(store.get("g1")), {"c": ["1", "2", "3"]})
    assert [r["params"] for r in rows] == [{"c": "1"}, {"c": "2"}, {"c": "3"}]
    assert [r["class_label"] for r in rows] == ["degenerate", "g1", None]
    assert rows[2]["segre_symbol"] == "[(111)(11)1]"
    assert all("class_label" in r or "error" in r for r in rows)


def test_sweep_rejects_unknown_parameter(store):
    with pytest.raises(ValidationError):
        classify_sweep(catalog_metric(store, "g2"), {"zeta": ["1"]})


def test_pair_normal_form_of_constant_metric(store):
    pair = pair_normal_form(complex_from_metric(catalog_metric(store, "g6")))
    assert pair.case == 1
    assert all(not e for row in matrix_rows(pair.B) for e in row)
    assert pair.to_dict()["A"] == [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]


# =============================================================================
# INVARIANCE
# =============================================================================

def _random_invertible(size, rng):
    while True:
        X = rational_matrix([[rng.randint(-2, 2) for _ in range(size)] for _ in range(size)])
        if det_fraction_free(X):
            return X


@pytest.mark.parametrize("entry_id, values, symbol", SYMBOLS)
def test_segre_symbol_is_invariant_under_congruence(store, entry_id, values, symbol):
    Q = complex_from_metric(catalog_metric(store, entry_id, **values))
    Qr = to_rational_matrix(Q.matrix).to_dense()
    omega = omega_n3().to_dense()
    rng = random.Random(entry_id)
    for _ in range(3):
        X = _random_invertible(6, rng).to_dense()
        moved = ComplexForm(3, Q.vt, X * Qr * X.transpose())
        assert str(segre_symbol(moved, X * omega * X.transpose())) == symbol


@pytest.mark.parametrize("entry_id", ["g2", "g3", "g4", "g5"])
def test_segre_symbol_survives_projective_change_of_coordinates(store, entry_id):
    g = catalog_metric(store, entry_id)
    before = str(segre_symbol(complex_from_metric(g)))
    T = random_projective_map(3, random.Random(31))
    h = pullback_metric(g, T)
    assert str(segre_symbol(complex_from_metric(h))) == before
    assert classify_n3(h).label == classify_n3(g).label
