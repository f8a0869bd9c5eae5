"""Tests for the differential ring, Hamiltonian flows and hydrodynamic diagnostics."""

import random

import pytest
from sympy import Rational, Symbol, cancel, expand

from models.geometry_model import MongeMetric
from models.system_model import HamiltonianFunctional, OperatorExpr
from tools.diffvar import (
    DiffRing,
    apply_operator,
    check_hamiltonian_flow,
    check_system,
    diagonalisability_conditions,
    diagonalisability_ideal_check,
    example6_family,
    haantjes_tensor,
    hydro_system_from_strings,
    is_diagonalisable,
    is_linearly_degenerate,
    operator_from_matrix,
    operator_from_metric,
    system_from_dict,
)
from utils.validation import (
    DimensionMismatchError,
    NonlocalResidueError,
    ParseError,
    UnknownVariableError,
    ValidationError,
)


def _bundle(store, entry_id):
    bundles = store.build_systems(store.get(entry_id))
    assert len(bundles) == 1
    return bundles[0]


# =============================================================================
# RING
# =============================================================================

def test_total_derivative():
    ring = DiffRing(2)
    u1, u2 = ring.u
    assert expand(ring.total_derivative(u1 * u2)) == expand(ring.u_x(1) * u2 + u1 * ring.u_x(2))
    assert ring.total_derivative(ring.w[0]) == u1
    assert ring.total_derivative(ring.x) == 1


def test_antiderivative_and_nonlocal_symbols():
    ring = DiffRing(2)
    u1, u2 = ring.u
    assert ring.antiderivative(ring.u_x(1)) == u1
    assert ring.antiderivative(u1) == ring.w[0]
    assert ring.antiderivative(1) == ring.x
    z = ring.antiderivative(u1 * u2)
    assert ring.antiderivative(u1 * u2) == z
    assert expand(ring.total_derivative(z) - u1 * u2) == 0
    assert len(ring.nonlocal_definitions) == 1


def test_antiderivative_treats_parameters_as_constants():
    ring = DiffRing(2, ("alpha",))
    alpha = ring.params[0]
    u1, u2 = ring.u
    assert ring.antiderivative(alpha * ring.u_x(1)) == alpha * u1
    assert ring.antiderivative(3 * alpha ** 2 * u2) == 3 * alpha ** 2 * ring.w[1]
    assert ring.antiderivative(alpha) == alpha * ring.x
    assert expand(ring.antiderivative(alpha * ring.u_x(1) - ring.jet("u", 2, 2)) - (alpha * u1 - ring.u_x(2))) == 0
    assert ring.nonlocal_definitions == {}


def test_variational_derivative_local():
    ring = DiffRing(1)
    u, u_x = ring.u[0], ring.u_x(1)
    H = HamiltonianFunctional(u * u_x ** 2 / 2)
    expected = -u_x ** 2 / 2 - u * ring.jet("u", 1, 2)
    assert expand(ring.variational_derivative(H, 1) - expected) == 0


def test_variational_derivative_nonlocal():
    ring = DiffRing(1)
    w = ring.w[0]
    delta = ring.variational_derivative(w ** 2 / 2, 1)
    assert not ring.is_local(delta)
    assert expand(ring.total_derivative(delta) + w) == 0


def test_variational_derivative_kills_total_derivatives():
    ring = DiffRing(2, ("alpha",))
    u1, u2 = ring.u
    alpha = ring.params[0]
    rng = random.Random(161)
    pieces = [u1, u2, ring.u_x(1), ring.u_x(2), alpha]
    for _ in range(10):
        f = sum(rng.randint(-3, 3) * rng.choice(pieces) * rng.choice(pieces) * rng.choice(pieces) for _ in range(4))
        density = ring.total_derivative(f)
        for k in (1, 2):
            assert expand(ring.variational_derivative(HamiltonianFunctional(density), k)) == 0


def test_variational_derivative_range():
    with pytest.raises(ValidationError):
        DiffRing(2).variational_derivative(Symbol("u1"), 3)


def test_parse_errors():
    ring = DiffRing(2, ("alpha",))
    assert ring.parse("alpha*u1^2") == Symbol("alpha") * ring.u[0] ** 2
    with pytest.raises(UnknownVariableError):
        ring.parse("u7 + 1")
    with pytest.raises(ParseError):
        ring.parse("u1 +* u2")
    with pytest.raises(ParseError):
        ring.parse("")


def test_parameter_names_must_not_clash():
    with pytest.raises(ValidationError):
        DiffRing(2, ("u1",))


def test_apply_operator_dimension_mismatch():
    ring = DiffRing(2)
    J = OperatorExpr(2, [[[["D"]], []], [[], [["D"]]]])
    with pytest.raises(DimensionMismatchError):
        apply_operator(ring, J, [ring.u[0]])
    assert apply_operator(ring, J, [ring.u[0], ring.u[1]]) == [ring.u_x(1), ring.u_x(2)]


def test_operator_from_chain_text():
    ring = DiffRing(1)
    J = operator_from_matrix([[[["u1", "D"]]]], ring)
    assert (J.pre, J.post) == (1, 1)
    u = ring.u[0]
    (image,) = apply_operator(ring, J, [u])
    expected = ring.u_x(1) * ring.jet("u", 1, 2) + u * ring.jet("u", 1, 3)
    assert expand(image - expected) == 0


def test_flux_must_be_local():
    ring = DiffRing(1)
    with pytest.raises(ValidationError):
        hydro_system_from_strings(["w1"], ring)


# =============================================================================
# CATALOGUED SYSTEMS
# =============================================================================

@pytest.mark.parametrize("entry_id", ["ex2", "ex3", "ex4", "ex5", "ex6"])
def test_catalogued_flows_are_hamiltonian(store, entry_id):
    bundle = _bundle(store, entry_id)
    J = operator_from_metric(bundle.metric)
    verdict = check_hamiltonian_flow(bundle.ring, bundle.system, J, bundle.hamiltonian)
    assert verdict.passed, verdict.witness


@pytest.mark.slow
def test_parametric_g1_flow_is_hamiltonian(store):
    result = check_system(_bundle(store, "ex1"))
    assert result.hamiltonian, result.witness
    assert result.linearly_degenerate


@pytest.mark.parametrize("entry_id", ["ex3", "ex4", "ex5", "ex6"])
def test_displayed_operators_match_metrics(store, entry_id):
    result = check_system(_bundle(store, entry_id))
    assert result.metric_matches
    assert result.linearly_degenerate


def test_perturbed_flux_is_not_hamiltonian(store):
    data = dict(store.get("ex5").payload)
    data["flux"] = ["u2", "2*u3", "u2^2 - u1*u3"]
    bundle = system_from_dict(data, metric=store.resolve_metric(data["metric"]), name="ex5-perturbed")
    result = check_system(bundle)
    assert result.hamiltonian is False
    assert result.witness


def test_perturbed_density_is_not_hamiltonian(store):
    data = dict(store.get("ex5").payload)
    data["hamiltonian_density"] = "-1/2*u1*w2^2 - 2*w2*w3"
    bundle = system_from_dict(data, metric=store.resolve_metric(data["metric"]))
    with pytest.raises(NonlocalResidueError):
        check_hamiltonian_flow(bundle.ring, bundle.system, operator_from_metric(bundle.metric), bundle.hamiltonian)
    result = check_system(bundle)
    assert result.hamiltonian is False
    assert result.witness.startswith("NonlocalResidueError")


def test_metric_dimension_must_match(store):
    data = store.get("ex5").payload
    with pytest.raises(DimensionMismatchError):
        system_from_dict(data, metric=store.resolve_metric("catalog:n4-stab14-a"))


# =============================================================================
# DEGENERACY AND DIAGONALISABILITY
# =============================================================================

def test_burgers_is_not_linearly_degenerate():
    ring = DiffRing(1)
    system = hydro_system_from_strings(["u1^2/2"], ring)
    assert not is_linearly_degenerate(system).passed
    assert is_linearly_degenerate(hydro_system_from_strings(["u1"], ring)).passed


def test_haantjes_vanishes_for_diagonal_systems():
    ring = DiffRing(2)
    system = hydro_system_from_strings(["u1^2", "u2^2"], ring)
    assert haantjes_tensor(system) == {}
    assert diagonalisability_conditions(system) == []
    assert is_diagonalisable(system).passed


def test_ex5_is_not_diagonalisable(store):
    bundle = _bundle(store, "ex5")
    verdict = is_diagonalisable(bundle.system)
    assert not verdict.passed
    assert verdict.details["conditions"]


def test_ex2_diagonalisability_ideal(store):
    system = _bundle(store, "ex2").system
    generic = is_diagonalisable(system)
    assert not generic.passed
    on_ideal = {"alpha": 1, "beta": 2, "gamma": 3, "delta": 6}
    off_ideal = {"alpha": 1, "beta": 0, "gamma": 0, "delta": 1}
    assert is_diagonalisable(system, on_ideal).passed
    assert not is_diagonalisable(system, off_ideal).passed
    assert generic.details["conditions"]
    coords = set(system.coords)
    assert all(not (c.free_symbols & coords) for c in diagonalisability_conditions(system))


def test_ex2_conditions_vanish_on_the_ideal(store):
    system = _bundle(store, "ex2").system
    alpha, beta, gamma, delta = (Symbol(s) for s in ("alpha", "beta", "gamma", "delta"))
    for c in diagonalisability_conditions(system):
        assert cancel(c.subs(delta, beta * gamma / alpha)) == 0
    assert diagonalisability_ideal_check(system, alpha * delta - beta * gamma).passed
    assert not diagonalisability_ideal_check(system, alpha + delta).passed


def test_ex2_diagonalisability_at_random_points(store):
    system = _bundle(store, "ex2").system
    rng = random.Random(2718)
    for _ in range(8):
        alpha, beta, gamma = (Rational(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3)) for _ in range(3))
        delta = beta * gamma / alpha
        on_ideal = {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta}
        off_ideal = dict(on_ideal, delta=delta + rng.randint(1, 4))
        assert is_diagonalisable(system, on_ideal).passed
        assert not is_diagonalisable(system, off_ideal).passed


# =============================================================================
# EXAMPLE FAMILY
# =============================================================================

def test_family_reproduces_four_component_example(store):
    data = example6_family(4)
    ex6 = store.get("ex6").payload
    assert data["flux"] == ex6["flux"]
    assert data["metric_inline"]["g"] == ex6["metric"]["g"]


def test_family_needs_three_components():
    with pytest.raises(ValidationError):
        example6_family(2)


@pytest.mark.parametrize("n", [4, 5, pytest.param(6, marks=pytest.mark.slow)])
def test_family_is_hamiltonian(n):
    data = example6_family(n)
    metric = MongeMetric.from_dict(data["metric_inline"], name=f"family-{n}")
    bundle = system_from_dict(data, metric=metric, name=f"family-{n}")
    result = check_system(bundle)
    assert result.hamiltonian, result.witness
    assert result.linearly_degenerate
