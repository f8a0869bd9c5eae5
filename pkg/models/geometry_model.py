"""
Data models for hamop geometry objects.

Bivectors and subspaces of Λ²V, forms on them, quadratic complexes, Monge
metrics and the transformation / classification records built from them.
Every model serializes with ``to_dict``/``from_dict`` using the polynomial
text grammar of ``utils.scalar_poly``.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Any, Tuple

from sympy.polys.domains import QQ

from utils.scalar_poly import (
    Poly,
    RatFunc,
    VarTable,
    parse_poly,
    format_poly,
    format_ratfunc,
    format_rational,
    coord_degree,
    rational,
)
from utils.exact_linalg import (
    Matrix,
    poly_matrix,
    rational_matrix,
    matrix_rows,
    identity,
    det_fraction_free,
    format_matrix,
    is_symmetric,
)
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    validate_integer,
    validate_bivector_triples,
    validate_square,
)


def _vartable_from(data: Dict[str, Any], n: int) -> VarTable:
    params = data.get('params', [])
    if not isinstance(params, list):
        raise ValidationError("params must be a list of names", "params")
    return VarTable.for_coords(n, params)


@dataclass(frozen=True)
class PluckerBasis:
    """Lexicographic basis e_a∧e_b (a<b) of Λ²V, V of dimension n+1, indices 1-based."""

    n: int

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return list(combinations(range(1, self.n + 2), 2))

    @property
    def quads(self) -> List[Tuple[int, int, int, int]]:
        return list(combinations(range(1, self.n + 2), 4))

    @property
    def size(self) -> int:
        return len(self.pairs)

    def index(self, a: int, b: int) -> Tuple[int, int]:
        """Position of p^{ab} in the basis and the sign relating it to p^{ab} (p^{ba} = -p^{ab})."""
        if a == b:
            raise ValidationError(f"Repeated index {a} in a bivector", "bivector")
        sign = 1
        if a > b:
            a, b = b, a
            sign = -1
        return self.pairs.index((a, b)), sign

    def label(self, pos: int) -> str:
        a, b = self.pairs[pos]
        return f"p{a}{b}"


@dataclass
class Bivector:
    """Element of Λ²V stored by its Plücker coefficients."""

    n: int
    vt: VarTable
    coeffs: List[Poly]

    def __post_init__(self):
        size = PluckerBasis(self.n).size
        if len(self.coeffs) != size:
            raise DimensionMismatchError(f"Bivector for n={self.n} needs {size} coefficients", "bivector")

    @classmethod
    def from_triples(cls, triples: List[Tuple[int, int, str]], n: int, vt: VarTable) -> 'Bivector':
        basis = PluckerBasis(n)
        coeffs = [vt.ring.zero] * basis.size
        for a, b, text in triples:
            pos, sign = basis.index(a, b)
            coeffs[pos] += parse_poly(text, vt) * sign
        return cls(n, vt, coeffs)

    def coefficient(self, a: int, b: int) -> Poly:
        if a == b:
            return self.vt.ring.zero
        pos, sign = PluckerBasis(self.n).index(a, b)
        return self.coeffs[pos] * sign

    def matrix_rows(self) -> List[List[Poly]]:
        """The (n+1)x(n+1) skew-symmetric matrix A with A[a][b] the coefficient of e_a∧e_b."""
        size = self.n + 1
        return [[self.coefficient(a, b) for b in range(1, size + 1)] for a in range(1, size + 1)]

    def matrix(self) -> Matrix:
        return poly_matrix(self.matrix_rows(), self.vt)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_triples(self) -> List[List[Any]]:
        basis = PluckerBasis(self.n)
        return [[a, b, format_poly(c)] for (a, b), c in zip(basis.pairs, self.coeffs) if c]

    def __str__(self) -> str:
        terms = [f"({t[2]})*e{t[0]}{t[1]}" for t in self.to_triples()]
        return " + ".join(terms) if terms else "0"


@dataclass
class FourVector:
    """Element of Λ⁴V, coefficients over e_a∧e_b∧e_c∧e_d with a<b<c<d."""

    n: int
    coeffs: List[Any]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def nonzero_terms(self) -> Dict[str, str]:
        quads = PluckerBasis(self.n).quads
        return {"e" + "".join(map(str, q)): format_poly(c) for q, c in zip(quads, self.coeffs) if c}


@dataclass
class SubspaceA:
    """n bivectors spanning a subspace of Λ²V^{n+1}."""

    n: int
    vt: VarTable
    bivectors: List[Bivector]
    name: str = ""

    def __post_init__(self):
        if len(self.bivectors) != self.n:
            raise DimensionMismatchError(
                f"Subspace for n={self.n} needs {self.n} bivectors, got {len(self.bivectors)}", "bivectors")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'params': list(self.vt.params),
            'bivectors': [b.to_triples() for b in self.bivectors],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], name: str = "") -> 'SubspaceA':
        n = validate_integer(data.get('n'), "n", min_value=1, max_value=12)
        vt = _vartable_from(data, n)
        raw = data.get('bivectors')
        if not isinstance(raw, list):
            raise ValidationError("bivectors must be a list", "bivectors")
        bivectors = [Bivector.from_triples(validate_bivector_triples(item, n), n, vt) for item in raw]
        return cls(n, vt, bivectors, name=name)


@dataclass
class PhiForm:
    """Symmetric n x n form φ_{βγ} on the subspace."""

    vt: VarTable
    rows: List[List[Poly]]

    def __post_init__(self):
        size = len(self.rows)
        for i in range(size):
            if len(self.rows[i]) != size:
                raise DimensionMismatchError("phi must be square", "phi")
            for j in range(i):
                if self.rows[i][j] != self.rows[j][i]:
                    raise ValidationError("phi must be symmetric", "phi")

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Poly:
        return self.rows[i][j]

    def matrix(self) -> Matrix:
        return poly_matrix(self.rows, self.vt)

    def det(self) -> Poly:
        return det_fraction_free(self.matrix())

    def is_degenerate(self) -> bool:
        return not self.det()

    def to_dict(self) -> Dict[str, Any]:
        return {'params': list(self.vt.params), 'phi': [[format_poly(e) for e in r] for r in self.rows]}

    @classmethod
    def from_rows(cls, rows: List[List[str]], vt: VarTable) -> 'PhiForm':
        validate_square(rows, "phi")
        return cls(vt, [[parse_poly(str(e), vt) for e in r] for r in rows])


@dataclass
class ComplexForm:
    """Symmetric N x N matrix Q on Λ²V in the lexicographic Plücker basis."""

    n: int
    vt: VarTable
    matrix: Matrix

    def __post_init__(self):
        size = PluckerBasis(self.n).size
        if self.matrix.shape != (size, size):
            raise DimensionMismatchError(f"Complex for n={self.n} must be {size}x{size}", "Q")
        if not is_symmetric(self.matrix):
            raise ValidationError("Q must be symmetric", "Q")

    def rows(self) -> List[List[Poly]]:
        return matrix_rows(self.matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'params': list(self.vt.params), 'Q': format_matrix(self.matrix)}


@dataclass
class GrassmannRelation:
    """Relation matrix Ω for one 4-subset: p Ω pᵗ is the Pfaffian of that principal minor."""

    quad: Tuple[int, int, int, int]
    matrix: Matrix

    def to_dict(self) -> Dict[str, Any]:
        return {'quad': list(self.quad), 'Omega': format_matrix(self.matrix)}


@dataclass
class MongeMetric:
    """Symmetric metric g_ij(u) with entries of degree at most 2 in the coordinates."""

    n: int
    vt: VarTable
    rows: List[List[Poly]]
    name: str = ""

    def __post_init__(self):
        if len(self.rows) != self.n or any(len(r) != self.n for r in self.rows):
            raise DimensionMismatchError(f"Metric must be {self.n}x{self.n}", "g")
        for i in range(self.n):
            for j in range(self.n):
                if self.rows[i][j] != self.rows[j][i]:
                    raise ValidationError(f"Metric is not symmetric at ({i + 1},{j + 1})", "g")
                if coord_degree(self.rows[i][j], self.vt) > 2:
                    raise ValidationError(
                        f"Entry g{i + 1}{j + 1} = {format_poly(self.rows[i][j])} has degree > 2", "g")

    def entry(self, i: int, j: int) -> Poly:
        return self.rows[i][j]

    def matrix(self) -> Matrix:
        return poly_matrix(self.rows, self.vt)

    def det(self) -> Poly:
        return det_fraction_free(self.matrix())

    def free_params(self) -> List[str]:
        """Parameters that actually occur in some entry."""
        used = set()
        for row in self.rows:
            for e in row:
                for monom in e.monoms():
                    used.update(i for i, k in enumerate(monom) if k)
        return [name for name in self.vt.params if self.vt.index(name) in used]

    def specialize(self, values: Dict[str, Any]) -> 'MongeMetric':
        """Substitute rational values for parameters (same VarTable)."""
        names = list(self.vt.names)
        pairs = [(names.index(k), rational(v)) for k, v in values.items() if k in names]
        if not pairs:
            return self
        rows = [[e.subs(pairs) for e in r] for r in self.rows]
        return MongeMetric(self.n, self.vt, rows, name=self.name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'params': list(self.vt.params),
            'g': [[format_poly(e) for e in r] for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], name: str = "") -> 'MongeMetric':
        n = validate_integer(data.get('n'), "n", min_value=1, max_value=12)
        vt = _vartable_from(data, n)
        rows = validate_square(data.get('g'), "g", size=n)
        return cls(n, vt, [[parse_poly(str(e), vt) for e in r] for r in rows], name=name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MongeMetric):
            return NotImplemented
        return self.n == other.n and self.vt == other.vt and self.rows == other.rows


@dataclass
class PsiData:
    """
    Linear data ψ^γ_k(u) = ψ^γ_{km} u^m + ω^γ_k of a subspace in a chart.

    ``psi[g][k][m]`` is skew in (k, m); ``omega[g][k]`` is the constant part.
    Entries are polynomials in the parameters only.
    """

    n: int
    vt: VarTable
    psi: List[List[List[Poly]]]
    omega: List[List[Poly]]

    def __post_init__(self):
        if len(self.psi) != self.n or len(self.omega) != self.n:
            raise DimensionMismatchError(f"PsiData needs {self.n} components", "psi")
        for g in range(self.n):
            for k in range(self.n):
                for m in range(self.n):
                    if self.psi[g][k][m] != -self.psi[g][m][k]:
                        raise ValidationError("psi must be skew-symmetric in its lower indices", "psi")

    def form(self, g: int, k: int) -> Poly:
        """ψ^g_k(u) as a polynomial in the coordinates."""
        u = self.vt.coord_gens()
        value = self.omega[g][k]
        for m in range(self.n):
            value += self.psi[g][k][m] * u[m]
        return value

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'params': list(self.vt.params),
            'psi': [[[format_poly(e) for e in row] for row in block] for block in self.psi],
            'omega': [[format_poly(e) for e in row] for row in self.omega],
        }


@dataclass
class ChristoffelObjects:
    """c_{mnk} (polynomials) and c^{ij}_k (rational functions), 0-based indices."""

    lower: List[List[List[Poly]]]
    upper: List[List[List[RatFunc]]]

    def to_dict(self) -> Dict[str, Any]:
        n = len(self.lower)
        return {
            'c_lower': {f"{m + 1}{a + 1}{k + 1}": format_poly(self.lower[m][a][k])
                        for m in range(n) for a in range(n) for k in range(n) if self.lower[m][a][k]},
            'c_upper': {f"{i + 1}{j + 1}_{k + 1}": format_ratfunc(self.upper[i][j][k])
                        for i in range(n) for j in range(n) for k in range(n) if self.upper[i][j][k]},
        }


@dataclass
class MongeGeneralCoeffs:
    """
    Constants of the general Monge form

        a_ij du^i du^j + b_{i,jk} du^i ω^{jk} + c_{ij,kl} ω^{ij} ω^{kl},
        ω^{jk} = u^j du^k - u^k du^j.

    ``b`` is keyed by (i, j, k) with j < k, ``c`` by (i, j, k, l) with i < j
    and k < l; indices are 1-based.
    """

    n: int
    a: List[List[Any]]
    b: Dict[Tuple[int, int, int], Any] = field(default_factory=dict)
    c: Dict[Tuple[int, int, int, int], Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.a) != self.n or any(len(r) != self.n for r in self.a):
            raise DimensionMismatchError(f"a must be {self.n}x{self.n}", "a")
        for i in range(self.n):
            for j in range(i):
                if self.a[i][j] != self.a[j][i]:
                    raise ValidationError("a must be symmetric", "a")
        for (i, j, k) in self.b:
            if not j < k:
                raise ValidationError(f"b index ({i},{j},{k}) needs j < k", "b")
        for (i, j, k, l) in self.c:
            if not (i < j and k < l):
                raise ValidationError(f"c index ({i},{j},{k},{l}) needs i < j and k < l", "c")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MongeGeneralCoeffs':
        n = validate_integer(data.get('n'), "n", min_value=1, max_value=12)
        a = [[rational(str(e)) for e in r] for r in validate_square(data.get('a'), "a", size=n)]
        b = {tuple(int(t) for t in item[:3]): rational(str(item[3])) for item in data.get('b', [])}
        c = {tuple(int(t) for t in item[:4]): rational(str(item[4])) for item in data.get('c', [])}
        return cls(n, a, b, c)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'a': [[format_rational(QQ.convert(e)) for e in r] for r in self.a],
            'b': [[*key, format_rational(QQ.convert(v))] for key, v in sorted(self.b.items())],
            'c': [[*key, format_rational(QQ.convert(v))] for key, v in sorted(self.c.items())],
        }


@dataclass
class ProjectiveMap:
    """ũ = L(u, 1) / l(u, 1) with l the last row of the invertible matrix L."""

    matrix: Matrix

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if rows != cols:
            raise DimensionMismatchError("Projective map needs a square matrix", "L")
        if self.matrix.domain != QQ:
            raise ValidationError("Projective map entries must be rational", "L")
        if not det_fraction_free(self.matrix):
            raise ValidationError("Projective map is not invertible", "L")

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @classmethod
    def from_rows(cls, rows: List[List[Any]]) -> 'ProjectiveMap':
        return cls(rational_matrix([[rational(e) for e in r] for r in rows]))

    @classmethod
    def identity(cls, n: int) -> 'ProjectiveMap':
        return cls(identity(n + 1))

    def is_affine(self) -> bool:
        last = matrix_rows(self.matrix)[-1]
        return all(not e for e in last[:-1])

    def compose(self, other: 'ProjectiveMap') -> 'ProjectiveMap':
        """self ∘ other (apply ``other`` first)."""
        return ProjectiveMap(self.matrix * other.matrix)

    def inverse(self) -> 'ProjectiveMap':
        return ProjectiveMap(self.matrix.inv())

    def to_dict(self) -> Dict[str, Any]:
        return {'L': format_matrix(self.matrix)}


@dataclass
class CurvatureReport:
    """Riemann (all n) and Cotton (n=3) diagnostics; components keyed by 1-based indices."""

    flat: bool
    riemann: Dict[str, str] = field(default_factory=dict)
    conformally_flat: Optional[bool] = None
    cotton: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'flat': self.flat,
            'riemann_nonzero': self.riemann,
            'conformally_flat': self.conformally_flat,
            'cotton_nonzero': self.cotton,
        }


@dataclass
class SingularVariety:
    """det g = constant * surface^2."""

    constant: Poly
    surface: Poly
    degree: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'constant': format_poly(self.constant),
            'surface': format_poly(self.surface),
            'degree': self.degree,
        }


class ClassLabel(Enum):
    G1 = "g1"
    G2 = "g2"
    G3 = "g3"
    G4 = "g4"
    G5 = "g5"
    G6 = "g6"
    DEGENERATE = "degenerate"
    NOT_HAMILTONIAN = "not-hamiltonian"


@dataclass
class SegreSymbol:
    """
    Jordan structure of C = QΩ^{-1}.

    ``groups`` lists, per eigenvalue, its Jordan block sizes; ``factors``
    holds the polynomial tag of each group's eigenvalue (a squarefree factor
    of the characteristic polynomial; roots of a higher-degree tag each get
    their own group).
    """

    groups: List[List[int]]
    factors: List[str] = field(default_factory=list)
    irrational: bool = False

    @property
    def size(self) -> int:
        return sum(sum(g) for g in self.groups)

    def __str__(self) -> str:
        parts = []
        for g in self.groups:
            body = "".join(str(b) for b in g)
            parts.append(f"({body})" if len(g) > 1 else body)
        return "[" + "".join(parts) + "]"

    def to_dict(self) -> Dict[str, Any]:
        return {
            'symbol': str(self),
            'groups': self.groups,
            'eigenvalue_factors': self.factors,
            'irrational_eigenvalues': self.irrational,
        }


@dataclass
class Discriminants:
    """μ, ν and 27μ²+ν³ read off the characteristic polynomial λ³(λ³ + pλ + q)."""

    mu: Poly
    nu: Poly
    discriminant: Poly

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mu': format_poly(self.mu),
            'nu': format_poly(self.nu),
            'discriminant': format_poly(self.discriminant),
        }


@dataclass
class Classification:
    label: Optional[ClassLabel]
    symbol: Optional[SegreSymbol] = None
    discriminants: Optional[Discriminants] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'class_label': self.label.value if self.label else None,
            'segre_symbol': str(self.symbol) if self.symbol else None,
            'discriminants': self.discriminants.to_dict() if self.discriminants else None,
        }


@dataclass
class PairNormalForm:
    """
    Reduction of a rank-3 complex to Q = [[A, AB], [BA, BAB]].

    ``transform`` is X with X Q_p Xᵗ = [[A, AB], [BA, BAB]] where Q_p is Q in
    the basis (du1, du2, du3, p23, p31, p12). ``case`` is the Jordan type
    of AB (1 diagonalisable, 2 one 2x2 block, 3 one 3x3 block).
    """

    A: Matrix
    B: Matrix
    transform: Matrix
    case: int
    canonical_A: Optional[Matrix] = None
    canonical_B: Optional[Matrix] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'A': format_matrix(self.A),
            'B': format_matrix(self.B),
            'transform': format_matrix(self.transform),
            'case': self.case,
            'canonical_A': format_matrix(self.canonical_A) if self.canonical_A is not None else None,
            'canonical_B': format_matrix(self.canonical_B) if self.canonical_B is not None else None,
        }
