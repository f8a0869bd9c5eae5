"""
Monge metrics.

Construction of g from a subspace A ⊂ Λ²V with a form φ on it, from the
linear data (ψ, ω, φ), from the general constant coefficients, and from a
quadratic complex Q. Extraction of the c-objects, of the flat-coordinate
operator coefficients and of the singular variety det g = const·S².
"""

import logging
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from sympy.polys.domains import QQ

from models.geometry_model import (
    PluckerBasis,
    Bivector,
    SubspaceA,
    PhiForm,
    ComplexForm,
    MongeMetric,
    PsiData,
    ChristoffelObjects,
    MongeGeneralCoeffs,
    SingularVariety,
)
from tools.exterior_grassmann import merge_vartables, lift_subspace, phi_columns
from utils.exact_linalg import (
    Matrix,
    poly_matrix,
    matrix_rows,
    adjugate,
    det_fraction_free,
)
from utils.scalar_poly import (
    Poly,
    RatFunc,
    VarTable,
    lift_poly,
    poly_derivative,
    poly_gcd,
    poly_sqrt,
    param_content,
    coord_degree,
    normalize_poly,
    format_poly,
)
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    SingularMetricError,
    DegenerateMetricError,
    NotHamiltonianError,
)

logger = logging.getLogger(__name__)

PAIRINGS = ("trace", "plucker")

# tr(A P) = -2 Σ_{a<b} A_ab p^{ab}
_PAIRING_SCALE = {"trace": -2, "plucker": 1}


def _check_pairing(pairing: str):
    if pairing not in PAIRINGS:
        raise ValidationError(f"Unknown pairing '{pairing}'; expected one of {PAIRINGS}", "pairing")


def _check_chart(n: int, chart: Optional[int]) -> int:
    chart = n + 1 if chart is None else chart
    if not 1 <= chart <= n + 1:
        raise ValidationError(f"Chart index {chart} outside 1..{n + 1}", "chart")
    return chart


def _chart_index(n: int, chart: int) -> Dict[int, int]:
    """Homogeneous index a (1-based, a != chart) -> position of the affine coordinate u."""
    others = [a for a in range(1, n + 2) if a != chart]
    return {a: pos for pos, a in enumerate(others)}


# =============================================================================
# PLÜCKER ONE-FORMS
# =============================================================================

def plucker_forms(n: int, vt: VarTable, chart: Optional[int] = None) -> List[List[Poly]]:
    """
    The one-forms p^{ab} = X_a dX_b - X_b dX_a in the affine chart X_chart = 1.

    Returns one length-n coefficient vector (on du^1..du^n) per basis pair.
    """
    chart = _check_chart(n, chart)
    ring = vt.ring
    u = vt.coord_gens()
    pos = _chart_index(n, chart)

    def X(a):
        return ring.one if a == chart else u[pos[a]]

    def dX(a):
        vec = [ring.zero] * n
        if a != chart:
            vec[pos[a]] = ring.one
        return vec

    forms = []
    for a, b in PluckerBasis(n).pairs:
        da, db = dX(a), dX(b)
        forms.append([X(a) * db[i] - X(b) * da[i] for i in range(n)])
    return forms


def bivector_form(A: Bivector, forms: List[List[Poly]], pairing: str = "trace") -> List[Poly]:
    """Pairing of a bivector with P, as a one-form in the chart."""
    scale = _PAIRING_SCALE[pairing]
    n = len(forms[0])
    out = [A.vt.ring.zero] * n
    for coeff, form in zip(A.coeffs, forms):
        if coeff:
            for i in range(n):
                out[i] += coeff * form[i]
    return [e * scale for e in out]


def _quadratic_metric(phi_rows: List[List[Poly]], psi: List[List[Poly]], vt: VarTable) -> List[List[Poly]]:
    n = len(psi[0])
    k = len(psi)
    rows = [[vt.ring.zero] * n for _ in range(n)]
    for b in range(k):
        for c in range(k):
            coeff = phi_rows[b][c]
            if not coeff:
                continue
            for i in range(n):
                for j in range(i, n):
                    rows[i][j] += coeff * psi[b][i] * psi[c][j]
    for i in range(n):
        for j in range(i):
            rows[i][j] = rows[j][i]
    return rows


# =============================================================================
# METRIC CONSTRUCTION
# =============================================================================

def metric_from_subspace(A: SubspaceA, phi: PhiForm, chart: Optional[int] = None,
                         pairing: str = "trace") -> MongeMetric:
    """
    g = φ_{βγ} <A^β, P> <A^γ, P> restricted to the chart u^chart = 1.

    Args:
        A: Subspace spanned by n bivectors
        phi: Symmetric form on A (admissibility is not enforced here)
        chart: Homogeneous index set to 1 (default n+1)
        pairing: "trace" for tr(A P), "plucker" for Σ_{a<b} A_ab p^{ab}

    Returns:
        MongeMetric over the union of the variable tables of A and φ
    """
    _check_pairing(pairing)
    if phi.n != A.n:
        raise DimensionMismatchError(f"phi is {phi.n}x{phi.n}, subspace has n={A.n}", "phi")
    vt = merge_vartables(A.vt, phi.vt)
    A = lift_subspace(A, vt)
    phi_rows = [[lift_poly(e, vt) for e in r] for r in phi.rows]
    if phi.is_degenerate():
        logger.warning(f"metric_from_subspace: phi is degenerate for subspace '{A.name}'")
    forms = plucker_forms(A.n, vt, chart)
    psi = [bivector_form(b, forms, pairing) for b in A.bivectors]
    rows = _quadratic_metric(phi_rows, psi, vt)
    logger.debug(f"metric_from_subspace: n={A.n}, chart={chart or A.n + 1}, pairing={pairing}")
    return MongeMetric(A.n, vt, rows, name=A.name)


def subspace_to_psi(A: SubspaceA, chart: Optional[int] = None, pairing: str = "trace") -> PsiData:
    """
    Linear data of A in a chart: ψ^γ_k(u) = ψ^γ_{km} u^m + ω^γ_k.

    With c the chart index and x(k) the homogeneous index of u^k,
    ψ^γ_{km} = s A^γ_{x(m) x(k)} and ω^γ_k = s A^γ_{c x(k)}, s the pairing scale.
    """
    _check_pairing(pairing)
    n = A.n
    chart = _check_chart(n, chart)
    scale = _PAIRING_SCALE[pairing]
    pos = _chart_index(n, chart)
    homog = {p: a for a, p in pos.items()}
    psi, omega = [], []
    for b in A.bivectors:
        psi.append([[b.coefficient(homog[m], homog[k]) * scale for m in range(n)] for k in range(n)])
        omega.append([b.coefficient(chart, homog[k]) * scale for k in range(n)])
    return PsiData(n, A.vt, psi, omega)


def metric_from_psi(data: PsiData, phi: PhiForm) -> MongeMetric:
    """g_ij = φ_{βγ} ψ^β_i ψ^γ_j."""
    if phi.n != data.n:
        raise DimensionMismatchError(f"phi is {phi.n}x{phi.n}, psi data has n={data.n}", "phi")
    vt = merge_vartables(data.vt, phi.vt)
    n = data.n
    psi = [[lift_poly(data.form(g, k), vt) for k in range(n)] for g in range(n)]
    phi_rows = [[lift_poly(e, vt) for e in r] for r in phi.rows]
    return MongeMetric(n, vt, _quadratic_metric(phi_rows, psi, vt))


def psi_phi_conditions(data: PsiData) -> Matrix:
    """
    The quadratic relations on (ψ, ω) read as a linear system in φ.

    For i<j<k<s:  φ_{βγ}(ψ^β_{is}ψ^γ_{jk} + ψ^β_{js}ψ^γ_{ki} + ψ^β_{ks}ψ^γ_{ij}) = 0,
    for i<j<k:    φ_{βγ}(ω^β_i ψ^γ_{jk} + ω^β_j ψ^γ_{ki} + ω^β_k ψ^γ_{ij}) = 0.
    Columns are φ_{βγ}, β <= γ, as in ``king_matrix``.
    """
    n = data.n
    psi, omega = data.psi, data.omega
    zero = data.vt.ring.zero

    def ab_term(b, g, i, j, k, s):
        return (psi[b][i][s] * psi[g][j][k] + psi[b][j][s] * psi[g][k][i]
                + psi[b][k][s] * psi[g][i][j])

    def zac_term(b, g, i, j, k):
        return omega[b][i] * psi[g][j][k] + omega[b][j] * psi[g][k][i] + omega[b][k] * psi[g][i][j]

    def row_for(term, *idx):
        row = []
        for b, g in phi_columns(n):
            value = term(b, g, *idx)
            if b != g:
                value += term(g, b, *idx)
            row.append(value)
        return row

    rows = [row_for(ab_term, *q) for q in combinations(range(n), 4)]
    rows += [row_for(zac_term, *t) for t in combinations(range(n), 3)]
    if not rows:
        rows = [[zero] * len(phi_columns(n))]
    return poly_matrix(rows, data.vt)


def monge_general(coeffs: MongeGeneralCoeffs, vt: Optional[VarTable] = None) -> MongeMetric:
    """Expand a_ij du^i du^j + b_{i,jk} du^i ω^{jk} + c_{ij,kl} ω^{ij} ω^{kl} into g_ij."""
    n = coeffs.n
    vt = vt or VarTable.for_coords(n)
    ring = vt.ring
    u = vt.coord_gens()
    half = QQ(1, 2)

    def omega(j, k):
        vec = [ring.zero] * n
        vec[k - 1] += u[j - 1]
        vec[j - 1] -= u[k - 1]
        return vec

    def unit(i):
        vec = [ring.zero] * n
        vec[i - 1] = ring.one
        return vec

    rows = [[ring(QQ.convert(coeffs.a[i][j])) for j in range(n)] for i in range(n)]

    def add_sym(x, y, weight):
        for i in range(n):
            for j in range(n):
                rows[i][j] += (x[i] * y[j] + y[i] * x[j]) * weight

    for (i, j, k), value in coeffs.b.items():
        add_sym(unit(i), omega(j, k), half * QQ.convert(value))
    for (i, j, k, l), value in coeffs.c.items():
        add_sym(omega(i, j), omega(k, l), half * QQ.convert(value))
    return MongeMetric(n, vt, rows)


def metric_from_complex(Q: ComplexForm, chart: Optional[int] = None) -> MongeMetric:
    """g = p Q pᵗ with p the vector of Plücker one-forms in the chart."""
    forms = plucker_forms(Q.n, Q.vt, chart)
    return MongeMetric(Q.n, Q.vt, _quadratic_metric(Q.rows(), forms, Q.vt))


# =============================================================================
# C-OBJECTS AND OPERATOR COEFFICIENTS
# =============================================================================

def metric_derivatives(g: MongeMetric) -> List[List[List[Poly]]]:
    """dg[i][j][k] = ∂_k g_ij."""
    n = g.n
    return [[[poly_derivative(g.rows[i][j], g.vt.coords[k]) for k in range(n)]
             for j in range(n)] for i in range(n)]


def lower_c(g: MongeMetric) -> List[List[List[Poly]]]:
    """c_{mnk} = ⅓(g_{mk,n} - g_{mn,k})."""
    n = g.n
    dg = metric_derivatives(g)
    third = QQ(1, 3)
    return [[[(dg[m][k][a] - dg[m][a][k]) * third for k in range(n)]
             for a in range(n)] for m in range(n)]


def c_from_metric(g: MongeMetric) -> ChristoffelObjects:
    """
    Lower and raised c-objects of a metric.

    Raised: c^{ij}_k = g^{ia} g^{jb} c_{bak}, computed as adj·adj·c / det².

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    n = g.n
    delta = g.det()
    if not delta:
        raise SingularMetricError(f"det g = 0 identically for metric '{g.name}'", "g")
    lower = lower_c(g)
    adj = matrix_rows(adjugate(g.matrix()))
    field = g.vt.field
    denom = field(delta ** 2)
    upper = [[[field.zero] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                total = g.vt.ring.zero
                for a in range(n):
                    if not adj[i][a]:
                        continue
                    for b in range(n):
                        if adj[j][b] and lower[b][a][k]:
                            total += adj[i][a] * adj[j][b] * lower[b][a][k]
                upper[i][j][k] = field(total) / denom
    return ChristoffelObjects(lower, upper)


def inverse_metric(g: MongeMetric) -> List[List[RatFunc]]:
    delta = g.det()
    if not delta:
        raise SingularMetricError(f"det g = 0 identically for metric '{g.name}'", "g")
    field = g.vt.field
    adj = matrix_rows(adjugate(g.matrix()))
    return [[field(e) / field(delta) for e in row] for row in adj]


def operator_coeffs(g: MongeMetric) -> Tuple[List[List[RatFunc]], List[List[List[RatFunc]]]]:
    """
    Coefficients of J = D(g^{ij} D + c^{ij}_k u^k_x) D.

    Returns:
        (g^{ij}, c^{ij}_k) as rational functions

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    return inverse_metric(g), c_from_metric(g).upper


# =============================================================================
# SINGULAR VARIETY
# =============================================================================

def singular_variety(g: MongeMetric) -> SingularVariety:
    """
    Factor det g = constant · S² with S free of parameter content.

    S is primitive with positive leading coefficient in graded-lex order.

    Raises:
        DegenerateMetricError: If det g vanishes identically
        NotHamiltonianError: If det g is not a constant times a square,
            or S has degree above n-1
    """
    delta = g.det()
    if not delta:
        raise DegenerateMetricError(f"det g = 0 identically for metric '{g.name}'", "g")
    result = poly_sqrt(delta, g.vt)
    if result is None:
        raise NotHamiltonianError(
            f"det g = {format_poly(delta)} is not a constant times a square", "g")
    constant, surface = result
    degree = coord_degree(surface, g.vt)
    if degree > g.n - 1:
        raise NotHamiltonianError(
            f"Singular surface {format_poly(surface)} has degree {degree} > {g.n - 1}", "g")
    logger.info(f"singular_variety: degree {degree} for metric '{g.name}'")
    return SingularVariety(constant, surface, degree)


def determinantal_locus(A: SubspaceA) -> Poly:
    """
    Gcd of the maximal minors of the (n+1) x n matrix (A¹X, ..., AⁿX), X = (u, 1).

    Its parameter-free part is the singular surface S of every metric built
    from A in the chart u^{n+1} = 1.
    """
    n = A.n
    vt = A.vt
    ring = vt.ring
    X = vt.coord_gens() + [ring.one]
    columns = []
    for b in A.bivectors:
        mat = b.matrix_rows()
        columns.append([sum((mat[r][c] * X[c] for c in range(n + 1)), ring.zero) for r in range(n + 1)])
    gcd = ring.zero
    for skip in range(n + 1):
        minor = [[columns[col][r] for col in range(n)] for r in range(n + 1) if r != skip]
        gcd = poly_gcd(gcd, det_fraction_free(poly_matrix(minor, vt)))
    if not gcd:
        return gcd
    content = param_content(gcd, vt)
    return normalize_poly(gcd.exquo(content))
