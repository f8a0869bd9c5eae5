"""
Exact linear algebra for hamop.

Thin layer over sympy's ``DomainMatrix``: matrices of polynomials live over
``QQ[vars]`` (the VarTable's ring as a domain), purely numeric ones over
``QQ``. Determinants are fraction free; rank and kernels are computed over
the fraction field and returned with denominators cleared.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Any, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ, PolynomialRing
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from utils.scalar_poly import (
    Poly,
    VarTable,
    format_poly,
    format_rational,
    _ring_for,
)
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    ParametricInputError,
)

logger = logging.getLogger(__name__)

Matrix = DomainMatrix


@dataclass
class SmithForm:
    """Invariant factors of a univariate polynomial matrix (monic, zeros last)."""

    factors: List[Poly] = field(default_factory=list)
    rank: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'factors': [format_poly(f) for f in self.factors],
            'rank': self.rank,
        }


# =============================================================================
# CONSTRUCTION
# =============================================================================

def poly_matrix(rows: Sequence[Sequence[Any]], vt: VarTable) -> Matrix:
    """Matrix over ``QQ[vt]``; entries may be Polys, ints or QQ elements."""
    ring = vt.ring
    if not rows:
        raise DimensionMismatchError("Matrix must have at least one row", "matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionMismatchError("Ragged matrix rows", "matrix")
    data = [[ring(e) for e in r] for r in rows]
    return DomainMatrix(data, (len(rows), width), ring.to_domain())


def rational_matrix(rows: Sequence[Sequence[Any]]) -> Matrix:
    if not rows:
        raise DimensionMismatchError("Matrix must have at least one row", "matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionMismatchError("Ragged matrix rows", "matrix")
    return DomainMatrix([[QQ.convert(e) for e in r] for r in rows], (len(rows), width), QQ)


def identity(n: int, vt: Optional[VarTable] = None) -> Matrix:
    domain = vt.ring.to_domain() if vt is not None else QQ
    return DomainMatrix.eye(n, domain).to_dense()


def matrix_rows(m: Matrix) -> List[List[Any]]:
    return m.to_dense().to_list()


def entry(m: Matrix, i: int, j: int) -> Any:
    return matrix_rows(m)[i][j]


def is_numeric(m: Matrix) -> bool:
    """True when every entry is a rational constant."""
    if m.domain == QQ:
        return True
    return all(e.is_ground for row in matrix_rows(m) for e in row)


def to_rational_matrix(m: Matrix) -> Matrix:
    """
    Convert a constant polynomial matrix to a matrix over QQ.

    Raises:
        ParametricInputError: If some entry still involves a variable
    """
    if m.domain == QQ:
        return m
    rows = matrix_rows(m)
    for row in rows:
        for e in row:
            if not e.is_ground:
                raise ParametricInputError(
                    f"Entry {format_poly(e)} is not a rational constant; specialize parameters first",
                    "matrix")
    return rational_matrix([[e.LC if e else QQ.zero for e in row] for row in rows])


def specialize_matrix(m: Matrix, values: Dict[str, Any]) -> Matrix:
    """Substitute rational values for named variables entrywise."""
    if m.domain == QQ or not values:
        return m
    names = [str(s) for s in m.domain.symbols]
    pairs = [(names.index(k), v) for k, v in values.items() if k in names]
    if not pairs:
        return m
    return m.applyfunc(lambda e: e.subs(pairs))


def transpose(m: Matrix) -> Matrix:
    return m.transpose()


def _check_square(m: Matrix, what: str):
    rows, cols = m.shape
    if rows != cols:
        raise DimensionMismatchError(f"{what} needs a square matrix, got {rows}x{cols}", "matrix")


def matrices_equal(a: Matrix, b: Matrix) -> bool:
    """Entrywise equality regardless of sparse/dense storage."""
    return a.shape == b.shape and matrix_rows(a) == matrix_rows(b)


def is_symmetric(m: Matrix) -> bool:
    return matrices_equal(m, m.transpose())


def is_skew(m: Matrix) -> bool:
    return matrices_equal(m, -m.transpose())


def trace(m: Matrix) -> Any:
    _check_square(m, "trace")
    rows = matrix_rows(m)
    total = m.domain.zero
    for i in range(len(rows)):
        total += rows[i][i]
    return total


# =============================================================================
# DETERMINANTS, RANK, KERNELS
# =============================================================================

def det_fraction_free(m: Matrix) -> Any:
    """
    Determinant computed without leaving the coefficient ring.

    Raises:
        DimensionMismatchError: If the matrix is not square
    """
    _check_square(m, "det")
    return m.det()


def adjugate(m: Matrix) -> Matrix:
    _check_square(m, "adjugate")
    return m.adjugate()


def _clear_vector(vec: List[Any], domain) -> List[Any]:
    """Scale a kernel vector to a primitive one with positive first nonzero entry."""
    if domain == QQ:
        coeffs = [e for e in vec if e]
        scale_of = lambda e: e
    else:
        coeffs = [c for e in vec for c in e.coeffs()]
        scale_of = lambda e: e.LC
    if not coeffs:
        return vec
    den = 1
    num = 0
    for c in coeffs:
        den = math.lcm(den, int(c.denominator))
        num = math.gcd(num, int(c.numerator))
    factor = QQ(den, num)
    first = next(e for e in vec if e)
    if scale_of(first) < 0:
        factor = -factor
    if domain == QQ:
        return [e * factor for e in vec]
    return [e.mul_ground(factor) for e in vec]


def rank_and_nullspace(m: Matrix) -> Tuple[int, List[List[Any]]]:
    """
    Rank over the fraction field and a basis of the right kernel.

    Kernel vectors have denominators cleared and are made primitive with a
    positive leading entry, so the output is deterministic.

    Returns:
        (rank, kernel basis as lists of Poly or QQ entries)
    """
    rank = m.rank()
    kernel = m.nullspace()
    basis = [_clear_vector(row, m.domain) for row in matrix_rows(kernel)] if kernel.shape[0] else []
    basis = [v for v in basis if any(v)]
    logger.debug(f"rank {rank}, kernel dim {len(basis)} for {m.shape[0]}x{m.shape[1]} matrix")
    return rank, basis


def matrix_rank(m: Matrix) -> int:
    return m.rank()


def solve_linear(m: Matrix, b: Sequence[Any]) -> Optional[List[Any]]:
    """
    One particular solution of ``m x = b`` over the fraction field.

    Free variables are set to zero. Returns ``None`` when the system is
    inconsistent. Entries are fraction-field elements (QQ for numeric input).
    """
    rows, cols = m.shape
    if len(b) != rows:
        raise DimensionMismatchError(f"Right-hand side has {len(b)} entries, expected {rows}", "rhs")
    mf = m.to_field()
    K = mf.domain
    rhs = DomainMatrix([[K.convert(m.domain.convert(e), m.domain)] for e in b], (rows, 1), K)
    aug = mf.hstack(rhs)
    rref, pivots = aug.rref()
    if cols in pivots:
        return None
    data = matrix_rows(rref)
    x = [K.zero] * cols
    for r, p in enumerate(pivots):
        x[p] = data[r][cols]
    return x


def pfaffian4(m: Matrix) -> Any:
    """Pfaffian of a 4x4 skew-symmetric matrix."""
    if m.shape != (4, 4):
        raise DimensionMismatchError(f"pfaffian4 needs a 4x4 matrix, got {m.shape}", "matrix")
    if not is_skew(m):
        raise ValidationError("pfaffian4 needs a skew-symmetric matrix", "matrix")
    a = matrix_rows(m)
    return a[0][1] * a[2][3] - a[0][2] * a[1][3] + a[0][3] * a[1][2]


# =============================================================================
# CHARACTERISTIC POLYNOMIAL / SMITH FORM
# =============================================================================

def char_ring(m: Matrix, var: str = "lam") -> PolyRing:
    """Ring ``QQ[var, symbols of m]`` in which the characteristic polynomial lives."""
    names: Tuple[str, ...] = ()
    if m.domain != QQ:
        names = tuple(str(s) for s in m.domain.symbols)
    if var in names:
        raise ValidationError(f"Variable name '{var}' clashes with matrix variables", "var")
    return _ring_for((var,) + names)


def char_poly(m: Matrix, var: str = "lam") -> Poly:
    """``det(var*I - m)`` as a polynomial in ``var`` and the entries' variables."""
    _check_square(m, "char_poly")
    ring = char_ring(m, var)
    lam = ring.gens[0]
    coeffs = m.charpoly()
    n = len(coeffs) - 1
    result = ring.zero
    for k, c in enumerate(coeffs):
        if m.domain == QQ:
            term = ring.ground_new(c)
        else:
            term = c.set_ring(ring)
        result += term * lam ** (n - k)
    return result


def univariate_domain(var: str = "lam") -> PolynomialRing:
    """``QQ[var]`` as a domain flagged as a principal ideal domain."""
    return PolynomialRing(QQ, (var,), grlex)


def lambda_matrix(c: Matrix, var: str = "lam") -> Matrix:
    """``var*I - c`` over ``QQ[var]`` for a numeric square matrix ``c``."""
    _check_square(c, "lambda_matrix")
    c = to_rational_matrix(c)
    dom = univariate_domain(var)
    ring = dom.ring
    lam = ring.gens[0]
    n = c.shape[0]
    rows = matrix_rows(c)
    data = [[(lam if i == j else ring.zero) - ring.ground_new(rows[i][j]) for j in range(n)]
            for i in range(n)]
    return DomainMatrix(data, (n, n), dom)


def smith_normal_form(m: Matrix) -> SmithForm:
    """
    Invariant factors of a matrix over ``QQ[lam]``.

    Raises:
        ParametricInputError: If entries are not univariate polynomials over QQ
    """
    dom = m.domain
    if not (dom.is_PolynomialRing and dom.ngens == 1 and dom.domain == QQ):
        raise ParametricInputError(
            f"Smith form needs a univariate polynomial matrix over QQ, got {dom}", "matrix")
    if not dom.is_PID:
        dom = univariate_domain(str(dom.symbols[0]))
        m = m.convert_to(dom)
    raw = invariant_factors(m)
    nonzero = [f.monic() for f in raw if f]
    zeros = [f for f in raw if not f]
    factors = nonzero + zeros
    # pad with the zero polynomial for rank-deficient input
    size = min(m.shape)
    factors += [dom.zero] * (size - len(factors))
    return SmithForm(factors=factors, rank=len(nonzero))


def format_matrix(m: Matrix) -> List[List[str]]:
    """Printable entries (polynomial text or rational literals)."""
    if m.domain == QQ:
        return [[format_rational(e) for e in row] for row in matrix_rows(m)]
    return [[format_poly(e) for e in row] for row in matrix_rows(m)]
