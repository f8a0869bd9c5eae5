"""Tests for exact polynomial arithmetic, parsing and square-root extraction."""

import random

import pytest
from sympy.polys.domains import QQ

from utils.scalar_poly import (
    PolyOp,
    VarTable,
    coord_degree,
    format_poly,
    normalize_poly,
    param_content,
    parse_poly,
    parse_ratfunc,
    poly_arith,
    poly_derivative,
    poly_exact_div,
    poly_gcd,
    poly_sqrt,
    rational,
    specialize,
    squarefree_factor,
)
from utils.validation import (
    DivisionByZeroError,
    NonExactDivisionError,
    ParseError,
    UnknownVariableError,
    VarTableMismatchError,
)


def test_rational_accepts_fraction_text():
    assert rational("1/2") == QQ(1, 2)
    assert rational(-3) == QQ(-3)


def test_rational_rejects_floats():
    with pytest.raises(ParseError):
        rational(0.5)
    with pytest.raises(ParseError):
        rational("1/0")


def test_parse_and_format(vt3):
    p = parse_poly("u1 + 1", vt3)
    assert format_poly(p) == "u1 + 1"
    assert format_poly(parse_poly("0", vt3)) == "0"
    q = parse_poly("(u1*u3 + u2)^2", vt3)
    assert parse_poly(format_poly(q), vt3) == q


def test_parse_errors(vt3):
    with pytest.raises(ParseError):
        parse_poly("u1 +", vt3)
    with pytest.raises(UnknownVariableError):
        parse_poly("u9 + 1", vt3)
    with pytest.raises(ParseError):
        parse_poly("1.5*u1", vt3)
    with pytest.raises(ParseError):
        parse_poly("u1/u2", vt3)


def test_parse_ratfunc(vt3):
    f = parse_ratfunc("u1/u2", vt3)
    assert f * vt3.field(vt3.gen("u2")) == vt3.field(vt3.gen("u1"))


def test_arith_over_mismatched_tables(vt3, vt3_mu):
    with pytest.raises(VarTableMismatchError):
        poly_arith(parse_poly("u1", vt3), parse_poly("u1", vt3_mu), PolyOp.ADD)


def test_arith_ops(vt3):
    p = parse_poly("u1 + u2", vt3)
    q = parse_poly("u1 - u2", vt3)
    assert poly_arith(p, q, "mul") == parse_poly("u1^2 - u2^2", vt3)
    assert poly_arith(p, q, PolyOp.SUB) == parse_poly("2*u2", vt3)


def test_derivative(vt3_mu):
    p = parse_poly("mu*u1^2*u3 + u2", vt3_mu)
    assert poly_derivative(p, "u1") == parse_poly("2*mu*u1*u3", vt3_mu)
    assert poly_derivative(p, "mu") == parse_poly("u1^2*u3", vt3_mu)
    with pytest.raises(UnknownVariableError):
        poly_derivative(p, "x")


def test_exact_division(vt3):
    p = parse_poly("u1^2 - 1", vt3)
    assert poly_exact_div(p, parse_poly("u1 - 1", vt3)) == parse_poly("u1 + 1", vt3)
    with pytest.raises(NonExactDivisionError):
        poly_exact_div(p, parse_poly("u2", vt3))
    with pytest.raises(DivisionByZeroError):
        poly_exact_div(p, parse_poly("0", vt3))


def test_normalize_and_gcd(vt3):
    assert normalize_poly(parse_poly("-2*u1 + 4", vt3)) == parse_poly("u1 - 2", vt3)
    p = parse_poly("(u1 - 1)*(u2 + 3)", vt3)
    q = parse_poly("2*(u1 - 1)*u3", vt3)
    assert poly_gcd(p, q) == parse_poly("u1 - 1", vt3)
    assert poly_gcd(parse_poly("0", vt3), q) == parse_poly("u1*u3 - u3", vt3)


def test_coord_degree_ignores_parameters(vt3_mu):
    assert coord_degree(parse_poly("mu^5*u1*u2 + u3", vt3_mu), vt3_mu) == 2
    assert coord_degree(parse_poly("mu^3", vt3_mu), vt3_mu) == 0
    assert coord_degree(parse_poly("0", vt3_mu), vt3_mu) == -1


def test_param_content(vt3_mu):
    p = parse_poly("2*mu*u1 + 4*mu^2*u2", vt3_mu)
    assert param_content(p, vt3_mu) == parse_poly("mu", vt3_mu)


def test_poly_sqrt_absorbs_parameter_factor(vt3_mu):
    p = parse_poly("mu*(u1*u3 + u2)^2", vt3_mu)
    constant, root = poly_sqrt(p, vt3_mu)
    assert constant == parse_poly("mu", vt3_mu)
    assert root == parse_poly("u1*u3 + u2", vt3_mu)


def test_poly_sqrt_constant_and_square(vt3):
    constant, root = poly_sqrt(parse_poly("-4*u1^2", vt3), vt3)
    assert constant * root ** 2 == parse_poly("-4*u1^2", vt3)
    assert root == parse_poly("u1", vt3)
    constant, root = poly_sqrt(parse_poly("7", vt3), vt3)
    assert root == parse_poly("1", vt3)


def test_poly_sqrt_rejects_non_squares(vt3):
    assert poly_sqrt(parse_poly("u1*u2", vt3), vt3) is None
    assert poly_sqrt(parse_poly("u1^2 + 1", vt3), vt3) is None


def test_squarefree_factor():
    vt = VarTable(("x",))
    factors = squarefree_factor(parse_poly("(x - 1)^2*(x + 2)", vt))
    assert factors == [(parse_poly("x - 1", vt), 2), (parse_poly("x + 2", vt), 1)]


def test_specialize(vt3_mu):
    p = parse_poly("mu*u1 + mu^2", vt3_mu)
    assert specialize(p, {"mu": rational("1/2")}) == parse_poly("1/2*u1 + 1/4", vt3_mu)
    assert specialize(p, {}) == p
    assert specialize(p, {"nu": rational(3)}) == p


# =============================================================================
# RANDOMIZED RING LAWS
# =============================================================================

def _random_poly(vt, rng, terms=4, degree=2):
    ring = vt.ring
    p = ring.zero
    for _ in range(terms):
        monomial = ring.one
        for g in ring.gens:
            monomial *= g ** rng.randint(0, degree)
        p += monomial * QQ(rng.randint(-5, 5), rng.randint(1, 3))
    return p


def test_ring_laws_on_random_polynomials(vt3, rng):
    for _ in range(25):
        p, q, r = (_random_poly(vt3, rng) for _ in range(3))
        assert poly_arith(p, q, PolyOp.ADD) == poly_arith(q, p, PolyOp.ADD)
        assert poly_arith(p, q, PolyOp.MUL) == poly_arith(q, p, PolyOp.MUL)
        pq = poly_arith(p, q, PolyOp.MUL)
        qr = poly_arith(q, r, PolyOp.MUL)
        assert poly_arith(pq, r, PolyOp.MUL) == poly_arith(p, qr, PolyOp.MUL)
        left = poly_arith(p, poly_arith(q, r, PolyOp.ADD), PolyOp.MUL)
        right = poly_arith(pq, poly_arith(p, r, PolyOp.MUL), PolyOp.ADD)
        assert left == right


def test_exact_division_undoes_multiplication(vt3, rng):
    for _ in range(25):
        p = _random_poly(vt3, rng)
        q = _random_poly(vt3, rng)
        if not q:
            continue
        assert poly_exact_div(poly_arith(p, q, PolyOp.MUL), q) == p


def test_poly_sqrt_recovers_random_squares(vt3, rng):
    for _ in range(20):
        s = _random_poly(vt3, rng, terms=3, degree=1)
        if not s:
            continue
        k = QQ(rng.choice([-3, -1, 1, 2, 5]), rng.randint(1, 4))
        p = s ** 2 * k
        constant, root = poly_sqrt(p, vt3)
        assert root == normalize_poly(s)
        assert constant.is_ground
        assert constant * root ** 2 == p
