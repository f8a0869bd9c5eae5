"""
Hamiltonian-property verification for Monge metrics.

A metric g defines a third-order Hamiltonian operator exactly when it
satisfies the linear Killing-type system and the quadratic second-order
system; the c-object formulation is checked independently. Also curvature
diagnostics and the action of projective transformations.
"""

import logging
import random
from typing import Dict, List, Optional

from sympy.polys.domains import QQ

from models.geometry_model import MongeMetric, ProjectiveMap, CurvatureReport
from models.report_model import Verdict
from tools.monge_metric import metric_derivatives, lower_c
from utils.exact_linalg import adjugate, matrix_rows, rational_matrix, det_fraction_free
from utils.scalar_poly import (
    Poly,
    RatFunc,
    coord_coefficients,
    coord_degree,
    format_poly,
    format_ratfunc,
    poly_derivative,
)
from utils.validation import (
    DimensionMismatchError,
    SingularMetricError,
    PullbackError,
)

logger = logging.getLogger(__name__)


def _nonsingular_det(g: MongeMetric) -> Poly:
    delta = g.det()
    if not delta:
        raise SingularMetricError(f"det g = 0 identically for metric '{g.name}'", "g")
    return delta


def _idx(*indices: int) -> str:
    return "".join(str(i + 1) for i in indices)


# =============================================================================
# CONDITION SYSTEMS
# =============================================================================

def check_killing(g: MongeMetric) -> Verdict:
    """g_{mk,n} + g_{kn,m} + g_{mn,k} = 0 for all index triples."""
    n = g.n
    dg = metric_derivatives(g)
    for m in range(n):
        for k in range(m, n):
            for a in range(k, n):
                value = dg[m][k][a] + dg[k][a][m] + dg[m][a][k]
                if value:
                    return Verdict(False, format_poly(value), {'indices': _idx(m, k, a)})
    return Verdict(True)


def check_nonlinear(g: MongeMetric) -> Verdict:
    """
    The second-order system, multiplied through by det g:

        Δ(g_{mk,nl} - g_{mn,kl}) + ⅓ adj^{pq}(g_{pl,m} - g_{pm,l})(g_{qk,n} - g_{qn,k}) = 0

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    n = g.n
    delta = _nonsingular_det(g)
    adj = matrix_rows(adjugate(g.matrix()))
    dg = metric_derivatives(g)
    coords = g.vt.coords
    ddg = [[[[poly_derivative(dg[i][j][k], coords[l]) for l in range(n)] for k in range(n)]
             for j in range(n)] for i in range(n)]
    third = QQ(1, 3)
    # skew[p][l][m] = g_{pl,m} - g_{pm,l}
    skew = [[[dg[p][l][m] - dg[p][m][l] for m in range(n)] for l in range(n)] for p in range(n)]
    for m in range(n):
        for k in range(n):
            for a in range(k + 1, n):
                for l in range(n):
                    quad = g.vt.ring.zero
                    for p in range(n):
                        if not skew[p][l][m]:
                            continue
                        for q in range(n):
                            if adj[p][q] and skew[q][k][a]:
                                quad += adj[p][q] * skew[p][l][m] * skew[q][k][a]
                    value = delta * (ddg[m][k][a][l] - ddg[m][a][k][l]) + quad * third
                    if value:
                        return Verdict(False, format_poly(value), {'indices': _idx(m, k, a, l)})
    return Verdict(True)


def check_potemin_system(g: MongeMetric) -> Verdict:
    """
    The c-object formulation: with c_{mnk} from the metric,

        g_{mn,k} = -c_{mnk} - c_{nmk},   c_{mnk} = -c_{mkn},
        c_{mnk} + c_{nkm} + c_{kmn} = 0,  Δ c_{mnk,l} + adj^{pq} c_{pml} c_{qnk} = 0.

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    n = g.n
    delta = _nonsingular_det(g)
    adj = matrix_rows(adjugate(g.matrix()))
    dg = metric_derivatives(g)
    c = lower_c(g)
    coords = g.vt.coords
    R = range(n)

    for m in R:
        for a in R:
            for k in R:
                value = dg[m][a][k] + c[m][a][k] + c[a][m][k]
                if value:
                    return Verdict(False, format_poly(value), {'relation': 'metric', 'indices': _idx(m, a, k)})
                value = c[m][a][k] + c[m][k][a]
                if value:
                    return Verdict(False, format_poly(value), {'relation': 'skew', 'indices': _idx(m, a, k)})
                value = c[m][a][k] + c[a][k][m] + c[k][m][a]
                if value:
                    return Verdict(False, format_poly(value), {'relation': 'cyclic', 'indices': _idx(m, a, k)})

    for m in R:
        for a in R:
            for k in R:
                for l in R:
                    value = delta * poly_derivative(c[m][a][k], coords[l])
                    for p in R:
                        if not c[p][m][l]:
                            continue
                        for q in R:
                            if adj[p][q] and c[q][a][k]:
                                value += adj[p][q] * c[p][m][l] * c[q][a][k]
                    if value:
                        return Verdict(False, format_poly(value),
                                       {'relation': 'quadratic', 'indices': _idx(m, a, k, l)})
    return Verdict(True)


# =============================================================================
# CURVATURE
# =============================================================================

def _connection_numerators(g: MongeMetric, adj: List[List[Poly]], dg) -> List[List[List[Poly]]]:
    """N^i_{lj} = adj^{im}(g_{mj,l} + g_{ml,j} - g_{lj,m}), so Γ^i_{lj} = N^i_{lj} / (2Δ)."""
    n = g.n
    zero = g.vt.ring.zero
    N = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for l in range(n):
            for j in range(n):
                total = zero
                for m in range(n):
                    if adj[i][m]:
                        total += adj[i][m] * (dg[m][j][l] + dg[m][l][j] - dg[l][j][m])
                N[i][l][j] = total
    return N


def riemann_numerators(g: MongeMetric) -> List[List[List[List[Poly]]]]:
    """
    T^i_{jkl} with R^i_{jkl} = T^i_{jkl} / (4Δ²), R^i_{jkl} = ∂_kΓ^i_{lj} - ∂_lΓ^i_{kj} + ...

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    n = g.n
    delta = _nonsingular_det(g)
    adj = matrix_rows(adjugate(g.matrix()))
    dg = metric_derivatives(g)
    coords = g.vt.coords
    N = _connection_numerators(g, adj, dg)
    d_delta = [poly_derivative(delta, x) for x in coords]
    dN = [[[[poly_derivative(N[i][l][j], coords[k]) for k in range(n)] for j in range(n)]
            for l in range(n)] for i in range(n)]
    zero = g.vt.ring.zero
    T = [[[[zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(k + 1, n):
                    value = ((delta * dN[i][l][j][k] - N[i][l][j] * d_delta[k])
                             - (delta * dN[i][k][j][l] - N[i][k][j] * d_delta[l])) * 2
                    for m in range(n):
                        value += N[i][k][m] * N[m][l][j] - N[i][l][m] * N[m][k][j]
                    T[i][j][k][l] = value
                    T[i][j][l][k] = -value
    return T


def _cotton(g: MongeMetric, T, delta: Poly) -> Dict[str, RatFunc]:
    """Cotton tensor of a 3-dimensional metric over the fraction field."""
    n = g.n
    field = g.vt.field
    fgens = [field.gens[g.vt.index(x)] for x in g.vt.coords]
    scale = field(delta ** 2 * 4)
    R = [[[[field(T[i][j][k][l]) / scale for l in range(n)] for k in range(n)]
          for j in range(n)] for i in range(n)]
    ginv = [[field(e) / field(delta) for e in row] for row in matrix_rows(adjugate(g.matrix()))]
    gf = [[field(e) for e in row] for row in g.rows]
    ric = [[sum((R[i][j][i][l] for i in range(n)), field.zero) for l in range(n)] for j in range(n)]
    scalar = sum((ginv[j][l] * ric[j][l] for j in range(n) for l in range(n)), field.zero)
    P = [[ric[i][j] - scalar * gf[i][j] / 4 for j in range(n)] for i in range(n)]

    adj = matrix_rows(adjugate(g.matrix()))
    dg = metric_derivatives(g)
    N = _connection_numerators(g, adj, dg)
    two_delta = field(delta * 2)
    gamma = [[[field(N[i][l][j]) / two_delta for j in range(n)] for l in range(n)] for i in range(n)]
    dP = [[[P[i][j].diff(fgens[k]) for k in range(n)] for j in range(n)] for i in range(n)]

    cotton = {}
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                value = dP[i][j][k] - dP[i][k][j]
                for m in range(n):
                    value += gamma[m][j][i] * P[m][k] - gamma[m][k][i] * P[m][j]
                if value:
                    cotton[_idx(i, j, k)] = value
    return cotton


def curvature(g: MongeMetric) -> CurvatureReport:
    """
    Riemann tensor of the Levi-Civita connection; Cotton tensor when n = 3.

    Raises:
        SingularMetricError: If det g vanishes identically
    """
    n = g.n
    delta = _nonsingular_det(g)
    T = riemann_numerators(g)
    field = g.vt.field
    scale = field(delta ** 2 * 4)
    riemann = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(k + 1, n):
                    if T[i][j][k][l]:
                        riemann[f"{i + 1}_{_idx(j, k, l)}"] = format_ratfunc(field(T[i][j][k][l]) / scale)
    flat = not riemann
    report = CurvatureReport(flat=flat, riemann=riemann)
    if n == 3:
        cotton = {} if flat else _cotton(g, T, delta)
        report.conformally_flat = not cotton
        report.cotton = {key: format_ratfunc(value) for key, value in cotton.items()}
    logger.info(f"curvature: metric '{g.name}' flat={flat}, conformally_flat={report.conformally_flat}")
    return report


# =============================================================================
# PROJECTIVE TRANSFORMATIONS
# =============================================================================

def pullback_metric(g: MongeMetric, T: ProjectiveMap) -> MongeMetric:
    """
    Express g in the coordinates ũ = L(u,1)/l(u,1) and rescale by l⁴.

    With M = L⁻¹, v = M(ũ,1) and m = v_{n+1}, the result is
    g̃_ab = G_ij(v, m) N^i_a N^j_b / m², G the degree-2 homogenization of g and
    N^i_a = m ∂_a v_i - v_i ∂_a m.

    Raises:
        DimensionMismatchError: If T acts on a different dimension
        PullbackError: If the quotient is not an exact polynomial of degree <= 2
    """
    n = g.n
    if T.n != n:
        raise DimensionMismatchError(f"Map acts on n={T.n}, metric has n={n}", "L")
    vt = g.vt
    ring = vt.ring
    u = vt.coord_gens()
    M = matrix_rows(T.matrix.inv())
    hom = u + [ring.one]
    v = [sum((hom[a] * M[i][a] for a in range(n + 1)), ring.zero) for i in range(n + 1)]
    m = v[n]
    coords = vt.coords
    dm = [poly_derivative(m, x) for x in coords]
    Nmat = [[m * poly_derivative(v[i], coords[a]) - v[i] * dm[a] for a in range(n)] for i in range(n)]

    G = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            total = ring.zero
            for monom, coeff in coord_coefficients(g.rows[i][j], vt).items():
                term = coeff * m ** (2 - sum(monom))
                for idx, e in enumerate(monom):
                    if e:
                        term *= v[idx] ** e
                total += term
            G[i][j] = G[j][i] = total

    m2 = m ** 2
    rows = [[ring.zero] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            num = ring.zero
            for i in range(n):
                if not Nmat[i][a]:
                    continue
                for j in range(n):
                    if G[i][j] and Nmat[j][b]:
                        num += G[i][j] * Nmat[i][a] * Nmat[j][b]
            quotient, remainder = num.div(m2)
            if remainder:
                raise PullbackError(f"Conformal factor does not clear in entry ({a + 1},{b + 1})", "L")
            if coord_degree(quotient, vt) > 2:
                raise PullbackError(f"Pulled-back entry ({a + 1},{b + 1}) has degree > 2", "L")
            rows[a][b] = rows[b][a] = quotient
    name = f"{g.name}@T" if g.name else ""
    return MongeMetric(n, vt, rows, name=name)


def random_projective_map(n: int, rng: Optional[random.Random] = None, spread: int = 2,
                          affine: bool = False) -> ProjectiveMap:
    """Invertible map with integer entries in [-spread, spread], drawn from ``rng``."""
    rng = rng or random.Random(0)
    while True:
        rows = [[rng.randint(-spread, spread) for _ in range(n + 1)] for _ in range(n + 1)]
        if affine:
            rows[n] = [0] * n + [1]
        matrix = rational_matrix(rows)
        if det_fraction_free(matrix):
            return ProjectiveMap(matrix)
