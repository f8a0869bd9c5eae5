"""
Segre classification of three-component quadratic complexes.

The complex Q of a Monge metric is recovered from g = pQpᵗ, put in normal
form, and classified by the Jordan structure of C = QΩ⁻¹ read off the
elementary divisors of λI - C. The six admissible symbols map to the six
canonical metrics g1..g6; a discriminant separates g1 from g2 inside the
one-parameter-coincidence family. The block reduction of Q to a pair of
quadratic forms (A, B) is provided as a second normal form.
"""

import logging
from itertools import product
from math import isqrt
from typing import Dict, List, Optional, Any, Tuple

from sympy.polys.domains import QQ

from models.geometry_model import (
    PluckerBasis,
    ComplexForm,
    MongeMetric,
    SegreSymbol,
    Discriminants,
    Classification,
    ClassLabel,
    PairNormalForm,
)
from tools.exterior_grassmann import normal_form_Q, plucker_relations, phi_columns
from tools.ham_verify import check_killing, check_nonlinear
from tools.monge_metric import plucker_forms
from utils.exact_linalg import (
    Matrix,
    poly_matrix,
    rational_matrix,
    matrix_rows,
    identity,
    to_rational_matrix,
    solve_linear,
    char_poly,
    lambda_matrix,
    smith_normal_form,
    det_fraction_free,
    matrix_rank,
    trace,
    matrices_equal,
)
from utils.scalar_poly import (
    VarTable,
    coord_coefficients,
    ratfunc_to_poly,
    format_poly,
    format_rational,
)
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    NotHamiltonianError,
    NormalFormError,
    ParametricInputError,
)

logger = logging.getLogger(__name__)

SEGRE_LABELS: Dict[str, ClassLabel] = {
    "[(111)111]": ClassLabel.G1,
    "[(111)12]": ClassLabel.G2,
    "[11(112)]": ClassLabel.G3,
    "[(114)]": ClassLabel.G4,
    "[(123)]": ClassLabel.G5,
    "[(222)]": ClassLabel.G6,
}


# =============================================================================
# COMPLEX OF A METRIC
# =============================================================================

def _monomials_upto2(n: int) -> List[Tuple[int, ...]]:
    monoms = [tuple([0] * n)]
    for i in range(n):
        m = [0] * n
        m[i] = 1
        monoms.append(tuple(m))
    for i in range(n):
        for j in range(i, n):
            m = [0] * n
            m[i] += 1
            m[j] += 1
            monoms.append(tuple(m))
    return monoms


def complex_from_metric(g: MongeMetric, chart: Optional[int] = None) -> ComplexForm:
    """
    Normal-form complex Q with g = pQpᵗ in the chart.

    Raises:
        NotHamiltonianError: If g is not a quadratic form in the Plücker one-forms
    """
    n = g.n
    vt = g.vt
    ring = vt.ring
    forms = plucker_forms(n, vt, chart)
    size = PluckerBasis(n).size
    unknowns = phi_columns(size)
    monoms = _monomials_upto2(n)

    # contribution of each unknown Q_IJ (I <= J) to g_ij, split by coordinate monomial
    contrib = []
    for I, J in unknowns:
        per_entry = {}
        for i in range(n):
            for j in range(i, n):
                value = forms[I][i] * forms[J][j]
                if I != J:
                    value += forms[J][i] * forms[I][j]
                if value:
                    per_entry[(i, j)] = coord_coefficients(value, vt)
        contrib.append(per_entry)

    rows, rhs = [], []
    for i in range(n):
        for j in range(i, n):
            target = coord_coefficients(g.rows[i][j], vt)
            for monom in monoms:
                rows.append([c.get((i, j), {}).get(monom, ring.zero) for c in contrib])
                rhs.append(target.get(monom, ring.zero))

    solution = solve_linear(poly_matrix(rows, vt), rhs)
    if solution is None:
        raise NotHamiltonianError(f"Metric '{g.name}' is not a quadratic form in the Plücker forms", "g")
    entries = [[ring.zero] * size for _ in range(size)]
    for (I, J), value in zip(unknowns, solution):
        entries[I][J] = entries[J][I] = ratfunc_to_poly(value)
    Q = ComplexForm(n, vt, poly_matrix(entries, vt))
    return normal_form_Q(Q)


def omega_n3() -> Matrix:
    """The Plücker quadric for n = 3 in the lexicographic basis."""
    return plucker_relations(3)[0].matrix


def _c_matrix(Q: ComplexForm, omega: Optional[Matrix] = None) -> Matrix:
    if omega is None:
        if Q.n != 3:
            raise DimensionMismatchError("Omega must be given for n != 3", "Omega")
        omega = omega_n3()
    omega = to_rational_matrix(omega)
    if not det_fraction_free(omega):
        raise ValidationError("Omega is not invertible", "Omega")
    inv = omega.inv()
    if Q.matrix.domain == QQ:
        return Q.matrix * inv
    return Q.matrix.to_dense() * inv.convert_to(Q.matrix.domain).to_dense()


# =============================================================================
# SEGRE SYMBOL
# =============================================================================

def _group_key(blocks: List[int]) -> Tuple[int, int, List[int]]:
    return (max(blocks), -len(blocks), blocks)


def segre_symbol(Q: ComplexForm, omega: Optional[Matrix] = None) -> SegreSymbol:
    """
    Jordan structure of C = QΩ⁻¹ from the elementary divisors of λI - C.

    Each irreducible factor f of the invariant factors contributes one group
    per root, with block sizes the exponents of f. Distinct roots of one
    irreducible factor are distinct eigenvalues.

    Raises:
        ParametricInputError: If Q still contains parameters
    """
    C = to_rational_matrix(_c_matrix(Q, omega))
    smith = smith_normal_form(lambda_matrix(C))
    factor_exps: Dict[Any, List[int]] = {}
    order: List[Any] = []
    for d in smith.factors:
        if not d or d.is_ground:
            continue
        _, factors = d.factor_list()
        for f, k in factors:
            f = f.monic()
            if f not in factor_exps:
                factor_exps[f] = []
                order.append(f)
            factor_exps[f].append(k)

    groups: List[Tuple[List[int], str]] = []
    irrational = False
    for f in order:
        blocks = sorted(factor_exps[f])
        degree = f.degree()
        if degree > 1:
            irrational = True
            logger.info(f"segre_symbol: eigenvalues are the {degree} roots of {format_poly(f)}")
        for _ in range(degree):
            groups.append((blocks, format_poly(f)))
    groups.sort(key=lambda item: (_group_key(item[0]), item[1]))
    symbol = SegreSymbol([g for g, _ in groups], [tag for _, tag in groups], irrational)
    if symbol.size != C.shape[0]:
        raise ValidationError(f"Segre symbol {symbol} does not account for all {C.shape[0]} eigenvalues", "C")
    return symbol


def discriminants(Q: ComplexForm) -> Discriminants:
    """
    μ = -q/16, ν = p/4 and 27μ² + ν³ from det(λI - C) = λ⁶ + pλ⁴ + qλ³.

    Works with symbolic parameters.
    """
    if Q.n != 3:
        raise DimensionMismatchError("Discriminants are defined for n = 3", "Q")
    C = _c_matrix(Q)
    cp = char_poly(C, "lam")
    cvt = VarTable(("lam",), Q.vt.names)
    by_power = {m[0]: c for m, c in coord_coefficients(cp.set_ring(cvt.ring), cvt).items()}
    ring = Q.vt.ring

    def coeff(k):
        c = by_power.get(k)
        return c.set_ring(ring) if c is not None else ring.zero

    stray = [k for k in (5, 2, 1, 0) if coeff(k)]
    if stray:
        logger.warning(f"discriminants: characteristic polynomial has extra powers {stray}")
    mu = coeff(3) * QQ(-1, 16)
    nu = coeff(4) * QQ(1, 4)
    return Discriminants(mu, nu, mu ** 2 * 27 + nu ** 3)


def c_invariants(Q: ComplexForm) -> Dict[str, Any]:
    """rank C and tr C for a numeric n = 3 complex."""
    C = to_rational_matrix(_c_matrix(Q))
    return {'rank_C': matrix_rank(C), 'trace_C': format_rational(trace(C))}


# =============================================================================
# CLASSIFICATION
# =============================================================================

def classify_n3(g: MongeMetric) -> Classification:
    """
    Class label g1..g6 of a three-component Hamiltonian Monge metric.

    Raises:
        DimensionMismatchError: If n != 3
        ParametricInputError: If g has unspecialized parameters
        NotHamiltonianError: If g fails the Hamiltonian conditions
    """
    if g.n != 3:
        raise DimensionMismatchError(f"classify_n3 needs n = 3, got n = {g.n}", "g")
    if g.free_params():
        raise ParametricInputError(
            f"Parameters {g.free_params()} must be specialized before classification", "params")
    if not g.det():
        return Classification(ClassLabel.DEGENERATE)
    for check in (check_killing, check_nonlinear):
        verdict = check(g)
        if not verdict:
            raise NotHamiltonianError(f"{check.__name__} failed: {verdict.witness}", "g")
    Q = complex_from_metric(g)
    symbol = segre_symbol(Q)
    disc = discriminants(Q)
    label = SEGRE_LABELS.get(str(symbol))
    if label is None and symbol.irrational and disc.discriminant:
        label = ClassLabel.G1
    if label is None:
        logger.warning(f"classify_n3: symbol {symbol} is outside the six admissible types")
    logger.info(f"classify_n3: metric '{g.name}' -> {symbol} ({label.value if label else 'unlabelled'})")
    return Classification(label, symbol, disc)


def classify_sweep(g: MongeMetric, grid: Dict[str, List[Any]]) -> List[Dict[str, Any]]:
    """
    Classify g at every point of a rational parameter grid (cartesian product,
    parameters in sorted order).
    """
    names = sorted(grid)
    for name in names:
        if name not in g.vt.params:
            raise ValidationError(f"'{name}' is not a parameter of metric '{g.name}'", name)
    results = []
    for values in product(*(grid[name] for name in names)):
        point = {name: str(v) for name, v in zip(names, values)}
        entry: Dict[str, Any] = {'params': point}
        try:
            entry.update(classify_n3(g.specialize(point)).to_dict())
        except (NotHamiltonianError, ParametricInputError) as e:
            entry['error'] = e.message
        results.append(entry)
    return results


# =============================================================================
# PAIR NORMAL FORM
# =============================================================================

# (du1, du2, du3, p23, p31, p12) in terms of (p12, p13, p14, p23, p24, p34)
_TP_BASIS = [(2, -1), (4, -1), (5, -1), (3, 1), (1, -1), (0, 1)]


def _blocks(M: List[List[Any]]) -> Tuple[Matrix, Matrix, Matrix]:
    A = rational_matrix([r[:3] for r in M[:3]])
    C = rational_matrix([r[3:] for r in M[:3]])
    D = rational_matrix([r[3:] for r in M[3:]])
    return A, C, D


def _block_matrix(top_left, top_right, bottom_left, bottom_right) -> Matrix:
    rows = []
    for left, right in ((top_left, top_right), (bottom_left, bottom_right)):
        for a, b in zip(matrix_rows(left), matrix_rows(right)):
            rows.append(list(a) + list(b))
    return rational_matrix(rows)


def _skew3(x, y, z) -> Matrix:
    return rational_matrix([[0, x, y], [-x, 0, z], [-y, -z, 0]])


def _jordan_case(AB: Matrix) -> int:
    smith = smith_normal_form(lambda_matrix(AB))
    minimal = smith.factors[-1] if smith.factors else None
    if minimal is None or minimal.is_ground:
        return 1
    _, factors = minimal.factor_list()
    return max(k for _, k in factors)


def _rational_eigenvalues(AB: Matrix) -> Optional[List[Any]]:
    cp = char_poly(AB, "lam")
    _, factors = cp.factor_list()
    roots = []
    for f, k in factors:
        if f.degree() != 1:
            return None
        lead = f.coeff(f.ring.gens[0])
        roots += [-f.coeff(1) / lead] * k
    return roots


def _rational_sqrt(value) -> Optional[Any]:
    num, den = int(value.numerator), int(value.denominator)
    if num < 0:
        return None
    rn, rd = _isqrt_exact(num), _isqrt_exact(den)
    if rn is None or rd is None:
        return None
    return QQ(rn, rd)


def _isqrt_exact(k: int) -> Optional[int]:
    r = isqrt(k)
    return r if r * r == k else None


def _canonical_pair(A: Matrix, AB: Matrix, case: int) -> Tuple[Optional[Matrix], Optional[Matrix]]:
    if case == 3:
        return (rational_matrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]]),
                rational_matrix([[0, 1, 0], [1, 0, 0], [0, 0, 0]]))
    roots = _rational_eigenvalues(AB)
    scale_sq = QQ.one / det_fraction_free(A)
    scale = _rational_sqrt(scale_sq)
    if roots is None or scale is None:
        logger.info("pair_normal_form: canonical pair needs irrational scaling, not reported")
        return None, None
    if case == 1:
        values = sorted((r * scale for r in roots), key=lambda r: (r == 0, -r))
        return identity(3), rational_matrix([[values[i] if i == j else 0 for j in range(3)] for i in range(3)])
    # one 2x2 block with eigenvalue a and a simple eigenvalue b
    counts = {r: roots.count(r) for r in roots}
    a = next(r for r, k in counts.items() if k >= 2)
    b = next((r for r, k in counts.items() if k == 1), a)
    a, b = a * scale, b * scale
    return (rational_matrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]]),
            rational_matrix([[1, a, 0], [a, 0, 0], [0, 0, b]]))


def pair_normal_form(Q: ComplexForm) -> PairNormalForm:
    """
    Reduce a rank-3 normal-form complex to [[A, AB], [BA, BAB]].

    The complex is written in the basis (du1, du2, du3, p23, p31, p12); if
    the du-block A is singular, a skew translation [[E, X2], [0, E]] with
    entries in {0, ±1} is searched in a fixed order, then the skew part of
    A⁻¹C is removed by [[E, 0], [X3, E]].

    Raises:
        ParametricInputError: If Q still contains parameters
        NormalFormError: If no translation makes A invertible, or the
            reduced complex does not have the block form
    """
    if Q.n != 3:
        raise DimensionMismatchError("pair_normal_form needs n = 3", "Q")
    Qr = matrix_rows(to_rational_matrix(Q.matrix))
    Qtp = [[Qr[r][s] * (sr * ss) for s, ss in _TP_BASIS] for r, sr in _TP_BASIS]
    A, C, D = _blocks(Qtp)
    E = identity(3)
    zero = rational_matrix([[0] * 3 for _ in range(3)])

    X2 = zero
    if not det_fraction_free(A):
        for x, y, z in product((0, 1, -1), repeat=3):
            K = _skew3(x, y, z)
            candidate = A + K * C.transpose() + C * K.transpose() + K * D * K.transpose()
            if det_fraction_free(candidate):
                X2 = K
                break
        else:
            raise NormalFormError("No translation makes the du-block of Q invertible", "Q")
        A = A + X2 * C.transpose() + C * X2.transpose() + X2 * D * X2.transpose()
        C = C + X2 * D
    T2 = _block_matrix(E, X2, zero, E)

    M = A.inv() * C
    K3 = (M - M.transpose()) * QQ(1, 2)
    B = (M + M.transpose()) * QQ(1, 2)
    T3 = _block_matrix(E, zero, K3, E)
    transform = T3 * T2

    reduced = transform * rational_matrix(Qtp) * transform.transpose()
    AB = A * B
    expected = _block_matrix(A, AB, AB.transpose(), B * A * B)
    if not matrices_equal(reduced, expected):
        raise NormalFormError("Reduced complex is not of the form [[A, AB], [BA, BAB]]", "Q")
    case = _jordan_case(AB)
    canonical_A, canonical_B = _canonical_pair(A, AB, case)
    logger.info(f"pair_normal_form: case {case}, tr(AB) = {trace(AB)}")
    return PairNormalForm(A, B, transform, case, canonical_A, canonical_B)
