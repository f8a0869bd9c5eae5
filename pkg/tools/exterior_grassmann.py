"""
Exterior algebra on V = V^{n+1}.

Bivectors and their wedge products into Λ⁴V, the Plücker relations of the
Grassmannian of lines, the linear condition φ_{βγ} A^β∧A^γ = 0 on forms
over a subspace A ⊂ Λ²V, and the normal form of a quadratic complex
(the representative Q + c_α Ω^α lying in the kernel of S²(Λ²V) → Λ⁴V).
"""

import logging
from typing import Dict, List, Optional, Any, Tuple

from sympy.polys.domains import QQ

from models.geometry_model import (
    PluckerBasis,
    Bivector,
    FourVector,
    SubspaceA,
    PhiForm,
    ComplexForm,
    GrassmannRelation,
)
from models.report_model import Verdict
from utils.exact_linalg import (
    Matrix,
    poly_matrix,
    rational_matrix,
    matrix_rows,
    rank_and_nullspace,
    matrix_rank,
    solve_linear,
    pfaffian4,
)
from utils.scalar_poly import (
    Poly,
    VarTable,
    format_poly,
    coord_coefficients,
    lift_poly,
    ratfunc_to_poly,
    rational,
    to_rational,
)
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    NormalFormError,
)

logger = logging.getLogger(__name__)


def plucker_basis(n: int) -> PluckerBasis:
    return PluckerBasis(n)


def phi_columns(n: int) -> List[Tuple[int, int]]:
    """Independent entries (β, γ), β <= γ, of a symmetric n x n form (0-based)."""
    return [(b, g) for b in range(n) for g in range(b, n)]


# =============================================================================
# WEDGE PRODUCTS
# =============================================================================

def _wedge_coeff(A: Bivector, B: Bivector, quad: Tuple[int, int, int, int]) -> Poly:
    a, b, c, d = quad
    x, y = A.coefficient, B.coefficient
    return (x(a, b) * y(c, d) - x(a, c) * y(b, d) + x(a, d) * y(b, c)
            + x(b, c) * y(a, d) - x(b, d) * y(a, c) + x(c, d) * y(a, b))


def wedge_bivectors(A: Bivector, B: Bivector) -> FourVector:
    """
    A ∧ B in Λ⁴V.

    Raises:
        DimensionMismatchError: If the bivectors live over different n
    """
    if A.n != B.n:
        raise DimensionMismatchError(f"Cannot wedge bivectors for n={A.n} and n={B.n}", "bivector")
    if A.vt != B.vt:
        vt = merge_vartables(A.vt, B.vt)
        A, B = lift_bivector(A, vt), lift_bivector(B, vt)
    quads = PluckerBasis(A.n).quads
    return FourVector(A.n, [_wedge_coeff(A, B, q) for q in quads])


def decomposable_bivector(u: List[Poly], v: List[Poly], vt: VarTable) -> Bivector:
    """u ∧ v for vectors given by their n+1 components."""
    if len(u) != len(v):
        raise DimensionMismatchError("Vectors must have the same length", "vector")
    n = len(u) - 1
    coeffs = [u[a - 1] * v[b - 1] - u[b - 1] * v[a - 1] for a, b in PluckerBasis(n).pairs]
    return Bivector(n, vt, coeffs)


def merge_vartables(first: VarTable, second: VarTable) -> VarTable:
    """Union of two tables sharing the same coordinates (parameters of ``first`` come first)."""
    if first.coords != second.coords:
        raise ValidationError(f"Coordinate mismatch {first.coords} vs {second.coords}", "vartable")
    return first.with_params(second.params)


def lift_bivector(A: Bivector, vt: VarTable) -> Bivector:
    return Bivector(A.n, vt, [lift_poly(c, vt) for c in A.coeffs])


def lift_subspace(A: SubspaceA, vt: VarTable) -> SubspaceA:
    if A.vt == vt:
        return A
    return SubspaceA(A.n, vt, [lift_bivector(b, vt) for b in A.bivectors], name=A.name)


def specialize_subspace(A: SubspaceA, values: Dict[str, Any]) -> SubspaceA:
    """Substitute rational values for parameters in every bivector coefficient."""
    pairs = [(A.vt.index(k), rational(v)) for k, v in values.items() if k in A.vt.params]
    if not pairs:
        return A
    bivectors = [Bivector(A.n, A.vt, [c.subs(pairs) for c in b.coeffs]) for b in A.bivectors]
    return SubspaceA(A.n, A.vt, bivectors, name=A.name)


# =============================================================================
# PLÜCKER RELATIONS
# =============================================================================

def _relation_matrix(n: int, quad: Tuple[int, int, int, int]) -> Matrix:
    basis = PluckerBasis(n)
    size = basis.size
    a, b, c, d = quad
    half = QQ(1, 2)
    rows = [[QQ.zero] * size for _ in range(size)]
    for (p, q), value in (((a, b), (c, d)), half), (((a, c), (b, d)), -half), (((a, d), (b, c)), half):
        i, _ = basis.index(*p)
        j, _ = basis.index(*q)
        rows[i][j] = value
        rows[j][i] = value
    return rational_matrix(rows)


def plucker_relations(n: int) -> List[GrassmannRelation]:
    """One relation Ω^α per 4-subset α of {1..n+1}; empty for n < 3."""
    if n < 3:
        return []
    return [GrassmannRelation(q, _relation_matrix(n, q)) for q in PluckerBasis(n).quads]


def _basis_bivectors(n: int, vt: VarTable) -> List[Bivector]:
    size = PluckerBasis(n).size
    ring = vt.ring
    return [Bivector(n, vt, [ring.one if k == i else ring.zero for k in range(size)]) for i in range(size)]


def dual_plucker_relations(n: int) -> List[GrassmannRelation]:
    """
    Relations Ω^{α*} of the dual Grassmannian, as quadratic forms on Λ²V.

    Entry (ab, cd) is half the e_α coefficient of e_a∧e_b∧e_c∧e_d, so only
    complementary pairs inside α meet, with the sign of the permutation
    taking (a, b, c, d) to α. Computed from wedges of basis bivectors,
    not from the Ω^α table.
    """
    if n < 3:
        return []
    vt = VarTable.for_coords(n)
    basis = PluckerBasis(n)
    units = _basis_bivectors(n, vt)
    half = QQ(1, 2)
    rows_by_quad: Dict[Tuple[int, int, int, int], List[List[Any]]] = {
        q: [[QQ.zero] * basis.size for _ in range(basis.size)] for q in basis.quads
    }
    for i, Ei in enumerate(units):
        for j in range(i + 1, basis.size):
            image = wedge_bivectors(Ei, units[j])
            for q, coeff in zip(basis.quads, image.coeffs):
                if coeff:
                    value = to_rational(coeff) * half
                    rows_by_quad[q][i][j] = value
                    rows_by_quad[q][j][i] = value
    return [GrassmannRelation(q, rational_matrix(rows_by_quad[q])) for q in basis.quads]


def relation_value(Q: ComplexForm, quad: Tuple[int, int, int, int]) -> Poly:
    """K_α(Q) = Q_{ab,cd} - Q_{ac,bd} + Q_{ad,bc}."""
    basis = PluckerBasis(Q.n)
    rows = Q.rows()
    a, b, c, d = quad

    def at(p, q):
        i, si = basis.index(*p)
        j, sj = basis.index(*q)
        return rows[i][j] * (si * sj)

    return at((a, b), (c, d)) - at((a, c), (b, d)) + at((a, d), (b, c))


# =============================================================================
# CONDITIONS ON PHI
# =============================================================================

def check_independent(A: SubspaceA):
    """
    Raises:
        ValidationError: If the bivectors are linearly dependent
    """
    rows = [list(b.coeffs) for b in A.bivectors]
    rank = matrix_rank(poly_matrix(rows, A.vt))
    if rank != A.n:
        raise ValidationError(f"Subspace bivectors are dependent (rank {rank} < {A.n})", "bivectors")


def king_matrix(A: SubspaceA) -> Matrix:
    """
    Linear system behind φ_{βγ} A^β∧A^γ = 0.

    Rows are indexed by 4-subsets, columns by φ_{βγ} with β <= γ
    (off-diagonal entries counted twice).
    """
    n = A.n
    quads = PluckerBasis(n).quads
    columns = phi_columns(n)
    rows = []
    for q in quads:
        row = []
        for b, g in columns:
            coeff = _wedge_coeff(A.bivectors[b], A.bivectors[g], q)
            row.append(coeff if b == g else coeff * 2)
        rows.append(row)
    if not rows:
        rows = [[A.vt.ring.zero] * len(columns)]
    return poly_matrix(rows, A.vt)


def _phi_from_vector(vec: List[Poly], n: int, vt: VarTable) -> PhiForm:
    rows = [[vt.ring.zero] * n for _ in range(n)]
    for (b, g), value in zip(phi_columns(n), vec):
        rows[b][g] = value
        rows[g][b] = value
    return PhiForm(vt, rows)


def solve_phi(A: SubspaceA) -> List[PhiForm]:
    """
    Basis of the admissible forms {φ ∈ S²A : φ_{βγ} A^β∧A^γ = 0}.

    Basis vectors are fraction-cleared and ordered as returned by the
    deterministic kernel computation.

    Raises:
        ValidationError: If the bivectors of A are dependent
    """
    check_independent(A)
    rank, kernel = rank_and_nullspace(king_matrix(A))
    logger.info(f"solve_phi: n={A.n}, King rank {rank}, phi-space dim {len(kernel)}")
    return [_phi_from_vector(v, A.n, A.vt) for v in kernel]


def general_phi(A: SubspaceA, prefix: str = "phi") -> Tuple[PhiForm, VarTable]:
    """
    Generic admissible φ = Σ phi_i φ^(i) with fresh parameters phi1..phik.

    Returns:
        (φ, extended VarTable holding the new parameters)
    """
    basis = solve_phi(A)
    names = [f"{prefix}{i}" for i in range(1, len(basis) + 1)]
    clash = [name for name in names if name in A.vt.names]
    if clash:
        raise ValidationError(f"Parameter names {clash} already in use", "prefix")
    vt = A.vt.with_params(names)
    n = A.n
    rows = [[vt.ring.zero] * n for _ in range(n)]
    for name, phi in zip(names, basis):
        t = vt.gen(name)
        for i in range(n):
            for j in range(n):
                rows[i][j] += lift_poly(phi.rows[i][j], vt) * t
    return PhiForm(vt, rows), vt


def phi_residual(A: SubspaceA, phi: PhiForm) -> FourVector:
    """φ_{βγ} A^β∧A^γ; zero exactly when φ is admissible."""
    if phi.n != A.n:
        raise DimensionMismatchError(f"phi is {phi.n}x{phi.n}, subspace has n={A.n}", "phi")
    vt = merge_vartables(A.vt, phi.vt)
    A = lift_subspace(A, vt)
    entries = [[lift_poly(e, vt) for e in r] for r in phi.rows]
    quads = PluckerBasis(A.n).quads
    coeffs = []
    for q in quads:
        total = vt.ring.zero
        for b in range(A.n):
            for g in range(A.n):
                if entries[b][g]:
                    total += entries[b][g] * _wedge_coeff(A.bivectors[b], A.bivectors[g], q)
        coeffs.append(total)
    return FourVector(A.n, coeffs)


def pfaffian_phi_conditions(A: SubspaceA) -> Matrix:
    """
    The same conditions read off Pfaffians: φ must be apolar to each quadratic
    form Pf_α(ξ) of the 4x4 principal minors of A(ξ) = ξ_β A^β.

    Rows: 4-subsets; columns: φ_{βγ}, β <= γ (coefficient of ξ_β ξ_γ).
    """
    n = A.n
    xi_names = tuple(f"xi{i}" for i in range(1, n + 1))
    xvt = VarTable(xi_names, A.vt.names)
    xi = xvt.coord_gens()
    size = n + 1
    mats = [[[lift_poly(e, xvt) for e in r] for r in b.matrix_rows()] for b in A.bivectors]
    generic = [[sum((xi[k] * mats[k][i][j] for k in range(n)), xvt.ring.zero) for j in range(size)]
               for i in range(size)]
    rows = []
    for quad in PluckerBasis(n).quads:
        idx = [q - 1 for q in quad]
        minor = poly_matrix([[generic[i][j] for j in idx] for i in idx], xvt)
        coeffs = coord_coefficients(pfaffian4(minor), xvt)
        row = []
        for b, g in phi_columns(n):
            monom = [0] * n
            monom[b] += 1
            monom[g] += 1
            row.append(coeffs.get(tuple(monom), xvt.ring.zero).set_ring(A.vt.ring))
        rows.append(row)
    if not rows:
        rows = [[A.vt.ring.zero] * len(phi_columns(n))]
    return poly_matrix(rows, A.vt)


# =============================================================================
# NORMAL FORM OF A COMPLEX
# =============================================================================

def complex_from_rows(rows: List[List[Any]], n: int, vt: Optional[VarTable] = None) -> ComplexForm:
    vt = vt or VarTable.for_coords(n)
    return ComplexForm(n, vt, poly_matrix(rows, vt))


def wedge_map_image(Q: ComplexForm) -> FourVector:
    """Image of Q under S²(Λ²V) → Λ⁴V; the coefficient on e_α is 2 K_α(Q)."""
    quads = PluckerBasis(Q.n).quads if Q.n >= 3 else []
    return FourVector(Q.n, [relation_value(Q, q) * 2 for q in quads])


def normal_form_Q(Q: ComplexForm) -> ComplexForm:
    """
    Unique representative Q + c_α Ω^α in the kernel of the wedge map.

    The c_α solve M c = -K(Q) with M_{αβ} = K_α(Ω^β).

    Raises:
        NormalFormError: If the system for c_α is not uniquely solvable
    """
    relations = plucker_relations(Q.n)
    if not relations:
        return Q
    domain = Q.matrix.domain
    omegas = [ComplexForm(Q.n, Q.vt, r.matrix.convert_to(domain).to_dense()) for r in relations]
    quads = [r.quad for r in relations]
    system = poly_matrix([[relation_value(om, q) for om in omegas] for q in quads], Q.vt)
    if matrix_rank(system) != len(quads):
        raise NormalFormError("Normal form coefficients are not uniquely determined", "Q")
    rhs = [-relation_value(Q, q) for q in quads]
    solution = solve_linear(system, rhs)
    if solution is None:
        raise NormalFormError("Normal form system is inconsistent", "Q")
    matrix = Q.matrix.to_dense()
    for coeff, om in zip(solution, omegas):
        c = ratfunc_to_poly(coeff)
        if c:
            matrix = matrix + om.matrix * c
    logger.debug(f"normal_form_Q: n={Q.n}, {sum(1 for c in solution if c)} relation terms added")
    return ComplexForm(Q.n, Q.vt, matrix)


def is_in_kernel(Q: ComplexForm) -> bool:
    return wedge_map_image(Q).is_zero()


def is_hamiltonian_complex(Q: ComplexForm, n: Optional[int] = None) -> Verdict:
    """True iff the normal form of Q has rank exactly n and lies in the kernel."""
    n = Q.n if n is None else n
    nf = normal_form_Q(Q)
    rank = matrix_rank(nf.matrix)
    in_kernel = is_in_kernel(nf)
    passed = rank == n and in_kernel
    witness = None if passed else f"rank {rank} (expected {n}), kernel membership {in_kernel}"
    return Verdict(passed, witness, {'rank': rank, 'in_kernel': in_kernel})


def apolarity_check(Q: ComplexForm) -> Verdict:
    """All traces tr(Q Ω^{α*}) vanish."""
    domain = Q.matrix.domain
    for rel in dual_plucker_relations(Q.n):
        product = Q.matrix.to_dense() * rel.matrix.convert_to(domain).to_dense()
        rows = matrix_rows(product)
        value = sum((rows[i][i] for i in range(len(rows))), domain.zero)
        if value:
            quad = "".join(map(str, rel.quad))
            return Verdict(False, f"tr(Q Omega*_{quad}) = {format_poly(value)}", {'quad': list(rel.quad)})
    return Verdict(True)
