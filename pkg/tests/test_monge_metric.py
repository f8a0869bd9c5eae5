"""Tests for Monge metric construction, operator coefficients and the singular variety."""

import pytest

from models.geometry_model import MongeGeneralCoeffs, MongeMetric
from tests.helpers import catalog_metric, catalog_subspace
from tools.exterior_grassmann import general_phi, king_matrix, solve_phi
from tools.monge_metric import (
    c_from_metric,
    determinantal_locus,
    inverse_metric,
    metric_from_complex,
    metric_from_psi,
    metric_from_subspace,
    monge_general,
    operator_coeffs,
    psi_phi_conditions,
    singular_variety,
    subspace_to_psi,
)
from tools.segre import complex_from_metric
from utils.exact_linalg import matrix_rank
from utils.scalar_poly import coord_degree, parse_poly, poly_sqrt, rational, specialize
from utils.validation import DegenerateMetricError, SingularMetricError, ValidationError


@pytest.mark.parametrize("entry_id", ["n3-case3", "n3-case4", "n3-case5"])
def test_case_determinants(store, entry_id):
    A, phi, pairing = catalog_subspace(store, entry_id)
    g = metric_from_subspace(A, phi, pairing=pairing)
    expected = parse_poly(store.get(entry_id).expected["det"], g.vt)
    assert g.det() == expected


def test_case1_metrics_are_degenerate(store):
    A, _, pairing = catalog_subspace(store, "n3-case1")
    phi, _ = general_phi(A)
    g = metric_from_subspace(A, phi, pairing=pairing)
    assert not g.det()
    with pytest.raises(DegenerateMetricError):
        singular_variety(g)
    with pytest.raises(SingularMetricError):
        inverse_metric(g)


def test_case2_gives_constant_metric(store):
    A, _, pairing = catalog_subspace(store, "n3-case2")
    phi = solve_phi(A)[0]
    g = metric_from_subspace(A, phi, pairing=pairing)
    assert all(coord_degree(e, g.vt) <= 0 for row in g.rows for e in row)


def test_trace_pairing_scales_by_four(store):
    A, phi, _ = catalog_subspace(store, "n3-case4")
    g_trace = metric_from_subspace(A, phi, pairing="trace")
    g_plucker = metric_from_subspace(A, phi, pairing="plucker")
    assert g_trace.rows == [[e * 4 for e in row] for row in g_plucker.rows]
    with pytest.raises(ValidationError):
        metric_from_subspace(A, phi, pairing="hodge")


def test_psi_route_agrees(store):
    A, phi, pairing = catalog_subspace(store, "n4-generic")
    direct = metric_from_subspace(A, phi, pairing=pairing)
    via_psi = metric_from_psi(subspace_to_psi(A, pairing=pairing), phi)
    assert via_psi.rows == direct.rows


@pytest.mark.parametrize("entry_id", ["n3-case4", "n4-generic"])
def test_psi_conditions_have_the_same_kernel(store, entry_id):
    A, _, pairing = catalog_subspace(store, entry_id)
    conditions = psi_phi_conditions(subspace_to_psi(A, pairing=pairing))
    assert matrix_rank(conditions) == matrix_rank(king_matrix(A))


def test_monge_general_constant_part():
    g = monge_general(MongeGeneralCoeffs(2, [[1, 0], [0, 2]]))
    assert g.rows == [[g.vt.ring(1), g.vt.ring.zero], [g.vt.ring.zero, g.vt.ring(2)]]


def test_monge_general_rotation_form():
    g = monge_general(MongeGeneralCoeffs(2, [[0, 0], [0, 0]], c={(1, 2, 1, 2): 1}))
    vt = g.vt
    assert g.rows[0][0] == parse_poly("u2^2", vt)
    assert g.rows[0][1] == parse_poly("-u1*u2", vt)
    assert g.rows[1][1] == parse_poly("u1^2", vt)


def test_complex_round_trip(store):
    g = catalog_metric(store, "g2")
    assert metric_from_complex(complex_from_metric(g)).rows == g.rows


def test_metric_rejects_cubic_entries():
    with pytest.raises(ValidationError):
        MongeMetric.from_dict({"n": 1, "g": [["u1^3"]]})


def test_c_objects_of_g4(store):
    g = catalog_metric(store, "g4")
    c = c_from_metric(g)
    n = g.n
    # c_{mnk} = -c_{mkn}
    for m in range(n):
        for a in range(n):
            for k in range(n):
                assert c.lower[m][a][k] == -c.lower[m][k][a]
    assert "c_lower" in c.to_dict()


def test_inverse_metric(store):
    g = catalog_metric(store, "g5")
    inv = inverse_metric(g)
    field = g.vt.field
    for i in range(3):
        for j in range(3):
            total = sum((inv[i][k] * field(g.rows[k][j]) for k in range(3)), field.zero)
            assert total == (field.one if i == j else field.zero)


def test_operator_coeffs_pair_inverse_with_raised_c(store):
    g = catalog_metric(store, "g4")
    ginv, cup = operator_coeffs(g)
    assert ginv == inverse_metric(g)
    assert cup == c_from_metric(g).upper


@pytest.mark.parametrize("entry_id, surface", [
    ("g2", "u1*u2 - u3"),
    ("g3", "u1"),
    ("g4", "u1"),
    ("g5", "1"),
    ("g6", "1"),
])
def test_singular_surfaces(store, entry_id, surface):
    g = catalog_metric(store, entry_id)
    variety = singular_variety(g)
    assert variety.surface == parse_poly(surface, g.vt)
    assert variety.constant * variety.surface ** 2 == g.det()
    assert variety.degree <= g.n - 1


@pytest.mark.parametrize("entry_id", ["n3-case2", "n3-case3", "n3-case4", "n3-case5", "n4-generic"])
def test_generic_determinant_is_constant_times_square(store, entry_id):
    A, _, pairing = catalog_subspace(store, entry_id)
    phi, _ = general_phi(A)
    g = metric_from_subspace(A, phi, pairing=pairing)
    result = poly_sqrt(g.det(), g.vt)
    assert result is not None
    _, surface = result
    assert coord_degree(surface, g.vt) <= A.n - 1


def test_n4_generic_surface_is_the_cubic(store):
    entry = store.get("n4-generic")
    A, phi, pairing = catalog_subspace(store, "n4-generic")
    g = metric_from_subspace(A, phi, pairing=pairing)
    point = {k: rational(v) for k, v in entry.expected["surface_at"].items()}
    g_at = MongeMetric(g.n, g.vt, [[specialize(e, point) for e in row] for row in g.rows])
    variety = singular_variety(g_at)
    cubic = parse_poly(entry.expected["surface"], g.vt)
    assert variety.surface == cubic or variety.surface == -cubic
    assert variety.degree == 3


def test_determinantal_locus_matches_surface(store):
    A, _, _ = catalog_subspace(store, "n3-case4")
    locus = determinantal_locus(A)
    assert locus == parse_poly("u1*u3 + u2", A.vt)
