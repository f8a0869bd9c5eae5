"""
Exact scalar arithmetic for hamop.

Sparse multivariate polynomials and rational functions over QQ, backed by
sympy's ``PolyRing``/``FracField`` in graded-lex order. A ``VarTable`` fixes
the variable order (coordinates first, then free parameters) and therefore
the canonical term order of every polynomial built over it.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from tokenize import TokenError
from typing import Dict, Any, List, Optional, Tuple, Union, Iterable

from sympy import Symbol, Float
from sympy.polys.domains import QQ
from sympy.polys.fields import FracField, FracElement
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed, CoercionFailed
from sympy.polys.rings import PolyRing, PolyElement
from sympy.parsing.sympy_parser import parse_expr, standard_transformations, convert_xor

from utils.validation import (
    ValidationError,
    VarTableMismatchError,
    UnknownVariableError,
    ParseError,
    NonExactDivisionError,
    DivisionByZeroError,
)

logger = logging.getLogger(__name__)

Poly = PolyElement
RatFunc = FracElement
Rational = Any  # QQ ground element (always reduced)

PARSE_TRANSFORMATIONS = standard_transformations + (convert_xor,)


@lru_cache(maxsize=None)
def _ring_for(names: Tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, grlex)


@dataclass(frozen=True)
class VarTable:
    """Ordered variable names: coordinates, then parameters."""

    coords: Tuple[str, ...]
    params: Tuple[str, ...] = ()

    def __post_init__(self):
        names = self.coords + self.params
        if not names:
            raise ValidationError("VarTable needs at least one variable", "vartable")
        if len(set(names)) != len(names):
            raise ValidationError(f"Duplicate variable names in {names}", "vartable")

    @classmethod
    def for_coords(cls, n: int, params: Iterable[str] = (), prefix: str = "u") -> 'VarTable':
        """Coordinate table ``u1..un`` followed by the given parameters."""
        return cls(tuple(f"{prefix}{i}" for i in range(1, n + 1)), tuple(params))

    @property
    def names(self) -> Tuple[str, ...]:
        return self.coords + self.params

    @property
    def ring(self) -> PolyRing:
        return _ring_for(self.names)

    @property
    def field(self) -> FracField:
        return self.ring.to_field()

    def gen(self, name: str) -> Poly:
        return self.ring.gens[self.index(name)]

    def coord_gens(self) -> List[Poly]:
        return [self.gen(name) for name in self.coords]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(f"Unknown variable '{name}'", name)

    def with_params(self, extra: Iterable[str]) -> 'VarTable':
        """Return a table with additional parameters appended (existing ones kept)."""
        params = list(self.params)
        for name in extra:
            if name not in params and name not in self.coords:
                params.append(name)
        return VarTable(self.coords, tuple(params))

    def symbols(self) -> Dict[str, Symbol]:
        return {name: Symbol(name) for name in self.names}

    def to_dict(self) -> Dict[str, Any]:
        return {'coords': list(self.coords), 'params': list(self.params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VarTable':
        return cls(tuple(data['coords']), tuple(data.get('params', ())))


class PolyOp(Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"


# =============================================================================
# RATIONALS
# =============================================================================

def rational(value: Union[int, str, Fraction, Any]) -> Rational:
    """Convert ints, ``'p/q'`` strings and Fractions to a QQ element."""
    if isinstance(value, str):
        try:
            frac = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"'{value}' is not a rational number", "rational")
        return QQ(frac.numerator, frac.denominator)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, float):
        raise ParseError("floating-point values are not accepted", "rational")
    return QQ.convert(value)


def format_rational(value: Rational) -> str:
    num, den = int(value.numerator), int(value.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def to_rational(p: Poly) -> Rational:
    """Return the value of a constant polynomial."""
    if not p.is_ground:
        raise ValidationError(f"Expected a constant, got {format_poly(p)}", "constant")
    return p.LC if p else QQ.zero


# =============================================================================
# OPERATIONS
# =============================================================================

def _check_same_ring(p: Poly, q: Poly):
    if p.ring != q.ring:
        raise VarTableMismatchError(
            f"Operands over different variable tables: {p.ring.symbols} vs {q.ring.symbols}", "vartable")


def poly_arith(p: Poly, q: Poly, op: Union[PolyOp, str]) -> Poly:
    """
    Exact add/sub/mul of two polynomials over the same VarTable.

    Raises:
        VarTableMismatchError: If the operands use different tables
    """
    _check_same_ring(p, q)
    op = PolyOp(op)
    if op is PolyOp.ADD:
        return p + q
    if op is PolyOp.SUB:
        return p - q
    return p * q


def poly_derivative(p: Poly, v: str) -> Poly:
    """Formal partial derivative with respect to the variable named ``v``."""
    names = [str(s) for s in p.ring.symbols]
    if v not in names:
        raise UnknownVariableError(f"Unknown variable '{v}'", v)
    return p.diff(p.ring.gens[names.index(v)])


def poly_exact_div(p: Poly, q: Poly) -> Poly:
    """
    Exact quotient ``p / q``.

    Raises:
        DivisionByZeroError: If ``q`` is the zero polynomial
        NonExactDivisionError: If ``q`` does not divide ``p``
    """
    _check_same_ring(p, q)
    if not q:
        raise DivisionByZeroError("Division by the zero polynomial", "divisor")
    try:
        return p.exquo(q)
    except ExactQuotientFailed:
        raise NonExactDivisionError(f"{format_poly(q)} does not divide {format_poly(p)}", "divisor")


def normalize_poly(p: Poly) -> Poly:
    """Primitive integer-coefficient representative with positive leading coefficient."""
    if not p:
        return p
    coeffs = p.coeffs()
    num = 0
    den = 1
    for c in coeffs:
        num = math.gcd(num, int(c.numerator))
        den = den * int(c.denominator) // math.gcd(den, int(c.denominator))
    q = p.mul_ground(QQ(den, num))
    if q.LC < 0:
        q = -q
    return q


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Normalized gcd; ``gcd(p, 0)`` is ``normalize_poly(p)``."""
    _check_same_ring(p, q)
    if not p:
        return normalize_poly(q)
    if not q:
        return normalize_poly(p)
    return normalize_poly(p.gcd(q))


def coord_degree(p: Poly, vt: VarTable) -> int:
    """Total degree in the coordinate variables (-1 for the zero polynomial)."""
    if not p:
        return -1
    idx = [vt.index(name) for name in vt.coords]
    return max(sum(monom[i] for i in idx) for monom in p.monoms())


def is_parameter_only(p: Poly, vt: VarTable) -> bool:
    return coord_degree(p, vt) <= 0


def coord_coefficients(p: Poly, vt: VarTable) -> Dict[Tuple[int, ...], Poly]:
    """Split ``p`` by coordinate monomial; values are polynomials in the parameters only."""
    ring = p.ring
    coord_idx = [vt.index(name) for name in vt.coords]
    groups: Dict[Tuple[int, ...], Poly] = {}
    for monom, coeff in p.terms():
        key = tuple(monom[i] for i in coord_idx)
        stripped = tuple(0 if i in coord_idx else e for i, e in enumerate(monom))
        groups[key] = groups.get(key, ring.zero) + ring({stripped: coeff})
    return groups


def param_content(p: Poly, vt: VarTable) -> Poly:
    """Gcd of the coefficients of ``p`` viewed as a polynomial in the coordinates."""
    ring = p.ring
    if not p:
        return ring.zero
    content = ring.zero
    for coeff_poly in coord_coefficients(p, vt).values():
        content = coeff_poly if not content else content.gcd(coeff_poly)
    return normalize_poly(content)


def lift_poly(p: Poly, vt: VarTable) -> Poly:
    """Move ``p`` into the (larger) ring of ``vt``; variables are matched by name."""
    if p.ring == vt.ring:
        return p
    return p.set_ring(vt.ring)


def poly_sqrt(p: Poly, vt: Optional[VarTable] = None) -> Optional[Tuple[Poly, Poly]]:
    """
    Decide whether ``p`` is a constant times a perfect square.

    Parameter-only factors are absorbed into the constant, so for
    ``mu*(u1*u3 + u2)^2`` the answer is ``(mu, u1*u3 + u2)``.

    Args:
        p: Polynomial to test
        vt: Table splitting coordinates from parameters; without it every
            variable counts as a coordinate

    Returns:
        ``(constant, s)`` with ``constant * s^2 == p`` and ``s`` normalized,
        or ``None`` when ``p`` is not of that form
    """
    ring = p.ring
    if vt is None:
        vt = VarTable(tuple(str(s) for s in ring.symbols))
    if not p:
        return ring.one, ring.zero

    coeff, factors = p.sqf_list()
    constant = ring.ground_new(coeff)
    root = ring.one
    for f, k in factors:
        content = param_content(f, vt)
        constant *= content ** k
        f = f.exquo(content)
        if is_parameter_only(f, vt):
            constant *= f ** k
        elif k % 2:
            logger.debug(f"poly_sqrt: odd multiplicity {k} for a coordinate factor")
            return None
        else:
            root *= f ** (k // 2)

    content = param_content(root, vt)
    if content != ring.one:
        root = root.exquo(content)
    root = normalize_poly(root)
    constant = p.exquo(root ** 2)
    if not is_parameter_only(constant, vt):
        return None
    # certificate
    if constant * root ** 2 != p:
        raise NonExactDivisionError("poly_sqrt certificate failed", "sqrt")
    return constant, root


def squarefree_factor(p: Poly) -> List[Tuple[Poly, int]]:
    """
    Squarefree decomposition of a univariate polynomial.

    Returns monic, pairwise coprime, squarefree factors with multiplicities,
    highest multiplicity first. The leading constant is dropped.

    Raises:
        ValidationError: If ``p`` is zero or involves more than one variable
    """
    if not p:
        raise ValidationError("squarefree_factor of the zero polynomial", "poly")
    used = {i for monom in p.monoms() for i, e in enumerate(monom) if e}
    if len(used) > 1:
        raise ValidationError("squarefree_factor expects a univariate polynomial", "poly")
    _, factors = p.sqf_list()
    result = [(f.monic(), k) for f, k in factors if not f.is_ground]
    result.sort(key=lambda fk: (-fk[1], max(sum(m) for m in fk[0].monoms()), format_poly(fk[0])))
    return result


def specialize(p: Poly, values: Dict[str, Rational]) -> Poly:
    """Substitute rational values for the named variables (same ring)."""
    if not values:
        return p
    names = [str(s) for s in p.ring.symbols]
    pairs = [(names.index(name), value) for name, value in values.items() if name in names]
    return p.subs(pairs) if pairs else p


def to_field(p: Poly) -> RatFunc:
    return p.ring.to_field()(p)


def ratfunc_to_poly(f: RatFunc) -> Poly:
    """Convert a rational function with constant denominator to a polynomial."""
    if not f.denom.is_ground:
        raise NonExactDivisionError(f"{format_ratfunc(f)} is not a polynomial", "ratfunc")
    return f.numer.mul_ground(QQ.one / f.denom.LC)


# =============================================================================
# PARSER / PRINTER
# =============================================================================

def _parse_to_expr(text: str, vt: VarTable):
    if not isinstance(text, str):
        if isinstance(text, int) and not isinstance(text, bool):
            text = str(text)
        else:
            raise ParseError(f"Expected polynomial text, got {type(text).__name__}", "poly")
    if not text.strip():
        raise ParseError("Empty polynomial text", "poly")
    try:
        expr = parse_expr(text, local_dict=vt.symbols(), transformations=PARSE_TRANSFORMATIONS,
                          evaluate=True)
    except (SyntaxError, TypeError, ValueError, TokenError) as e:
        raise ParseError(f"Cannot parse '{text}': {e}", "poly")
    if expr.atoms(Float):
        raise ParseError(f"Floating-point literal in '{text}'", "poly")
    unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in vt.names)
    if unknown:
        raise UnknownVariableError(f"Unknown variables {unknown} in '{text}'", unknown[0])
    return expr


def parse_poly(text: str, vt: VarTable) -> Poly:
    """
    Parse polynomial text (``+ - * ^``, ``/`` for rational constants).

    Raises:
        ParseError: If the text is malformed or not polynomial
        UnknownVariableError: If it uses names outside the VarTable
    """
    expr = _parse_to_expr(text, vt)
    try:
        return vt.ring.from_expr(expr)
    except (ValueError, CoercionFailed):
        raise ParseError(f"'{text}' is not a polynomial in {', '.join(vt.names)}", "poly")


def parse_ratfunc(text: str, vt: VarTable) -> RatFunc:
    expr = _parse_to_expr(text, vt)
    try:
        f = vt.field.from_expr(expr)
    except (ValueError, CoercionFailed, ZeroDivisionError):
        raise ParseError(f"'{text}' is not a rational function in {', '.join(vt.names)}", "ratfunc")
    return f


def _format_monomial(monom: Tuple[int, ...], names: Tuple[str, ...]) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    """Print in graded-lex order with ``^``; ``parse_poly`` reads it back."""
    if not p:
        return "0"
    names = tuple(str(s) for s in p.ring.symbols)
    out = []
    for monom, coeff in p.terms():
        mono = _format_monomial(monom, names)
        negative = coeff < 0
        mag = -coeff if negative else coeff
        if not mono:
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        if not out:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def format_ratfunc(f: RatFunc) -> str:
    num, den = f.numer, f.denom
    if den.is_ground:
        return format_poly(num.mul_ground(QQ.one / den.LC))
    return f"({format_poly(num)})/({format_poly(den)})"
