"""
Differential algebra for nonlocal Hamiltonians.

A ``DiffRing`` holds the jet symbols of n dependent variables u¹..uⁿ (plus
optional test fields v¹..vᵐ), their antiderivatives w^i with D w^i = u^i,
and named nonlocal symbols z_k created on demand by D⁻¹, each with its
defining expression D z_k. On top of it: total derivative, Euler operator,
application of matrix differential operators and the diagnostics of
hydrodynamic-type systems u_t = (V(u))_x.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Any, Tuple

from sympy import (
    Add,
    Expr,
    Integer,
    Matrix as SymMatrix,
    Poly as SymPoly,
    Rational as SymRational,
    Symbol,
    cancel,
    diff,
    div,
    expand,
    eye,
    factor,
    fraction,
    sstr,
    sympify,
    together,
    zeros,
)
from sympy.parsing.sympy_parser import parse_expr, standard_transformations, convert_xor

from models.geometry_model import MongeMetric
from models.report_model import Verdict
from models.system_model import (
    DiffPoly,
    HamiltonianFunctional,
    OperatorExpr,
    HydroSystem,
    SystemCheck,
)
from tools.monge_metric import operator_coeffs
from utils.validation import (
    ValidationError,
    DimensionMismatchError,
    ParseError,
    UnknownVariableError,
    NonlocalResidueError,
    validate_integer,
)

logger = logging.getLogger(__name__)

PARSE_TRANSFORMATIONS = standard_transformations + (convert_xor,)
DERIVATIVE = "D"


class DiffRing:
    """
    Jet variables, antiderivatives and nonlocal symbols for n fields.

    Nonlocal symbols are memoized by their (expanded) defining expression, so
    repeated D⁻¹ of the same expression returns the same symbol.
    """

    def __init__(self, n: int, params: Tuple[str, ...] = (), test_fields: int = 0):
        self.n = validate_integer(n, "n", min_value=1, max_value=12)
        self.x = Symbol("x")
        self.params = [Symbol(p) for p in params]
        self._jets: Dict[Tuple[str, int, int], Symbol] = {}
        self._jet_of: Dict[Symbol, Tuple[str, int, int]] = {}
        self.w = [Symbol(f"w{i}") for i in range(1, n + 1)]
        self._w_of = {w: i for i, w in enumerate(self.w)}
        self._z_defs: Dict[Symbol, Expr] = {}
        self._z_memo: Dict[Expr, Symbol] = {}
        self.u = [self.jet("u", i, 0) for i in range(1, n + 1)]
        self.v = [self.jet("v", j, 0) for j in range(1, test_fields + 1)]
        reserved = {str(s) for s in [self.x] + self.w + self.u + self.v}
        clash = [p for p in params if p in reserved]
        if clash:
            raise ValidationError(f"Parameter names {clash} clash with field names", "params")

    # -------------------------------------------------------------------------
    # symbols
    # -------------------------------------------------------------------------

    def jet(self, family: str, i: int, k: int) -> Symbol:
        key = (family, i, k)
        sym = self._jets.get(key)
        if sym is None:
            name = f"{family}{i}" + (f"_{'x' * k}" if k else "")
            sym = Symbol(name)
            self._jets[key] = sym
            self._jet_of[sym] = key
        return sym

    def u_x(self, i: int) -> Symbol:
        """First x-derivative of u^i (1-based)."""
        return self.jet("u", i, 1)

    @property
    def nonlocal_definitions(self) -> Dict[Symbol, Expr]:
        return dict(self._z_defs)

    def symbol_table(self) -> Dict[str, Symbol]:
        table = {str(s): s for s in [self.x] + self.w + self.params}
        table.update({str(s): s for s in self._jets.values()})
        table.update({str(z): z for z in self._z_defs})
        return table

    def is_local(self, f: Expr) -> bool:
        allowed = {self.x} | set(self._jet_of) | set(self.params)
        return sympify(f).free_symbols <= allowed

    def parse(self, text: Any) -> Expr:
        """
        Parse a differential expression over this ring.

        Raises:
            ParseError: If the text is malformed
            UnknownVariableError: If it uses names outside the ring
        """
        if isinstance(text, Expr):
            return text
        if isinstance(text, int) and not isinstance(text, bool):
            return Integer(text)
        if not isinstance(text, str) or not text.strip():
            raise ParseError(f"Expected expression text, got {text!r}", "expr")
        table = self.symbol_table()
        try:
            expr = parse_expr(text, local_dict=table, transformations=PARSE_TRANSFORMATIONS)
        except (SyntaxError, TypeError, ValueError) as e:
            raise ParseError(f"Cannot parse '{text}': {e}", "expr")
        unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in table)
        if unknown:
            raise UnknownVariableError(f"Unknown names {unknown} in '{text}'", unknown[0])
        return expr

    # -------------------------------------------------------------------------
    # D and D^-1
    # -------------------------------------------------------------------------

    def total_derivative(self, f: DiffPoly) -> DiffPoly:
        """D = ∂_x + Σ u_{k+1} ∂/∂u_k + Σ u^i ∂/∂w^i + Σ (D z) ∂/∂z."""
        f = sympify(f)
        result = diff(f, self.x)
        for s in f.free_symbols:
            if s in self._jet_of:
                family, i, k = self._jet_of[s]
                result += diff(f, s) * self.jet(family, i, k + 1)
            elif s in self._w_of:
                result += diff(f, s) * self.u[self._w_of[s]]
            elif s in self._z_defs:
                result += diff(f, s) * self._z_defs[s]
        return result

    def antiderivative(self, f: DiffPoly) -> DiffPoly:
        """
        D⁻¹ f: constants, u^i and higher jets integrate directly, the rest
        becomes a (memoized) nonlocal symbol. Parameters count as constants.
        """
        f = expand(sympify(f))
        if f == 0:
            return Integer(0)
        result = Integer(0)
        rest = Integer(0)
        varying = {self.x} | set(self._jet_of) | set(self._w_of) | set(self._z_defs)
        for term in Add.make_args(f):
            moving = term.free_symbols & varying
            if moving:
                coeff, body = term.as_independent(*moving, as_Add=False)
            else:
                coeff, body = term, Integer(1)
            if body == 1:
                result += coeff * self.x
            elif body in self._jet_of and self._jet_of[body][2] > 0:
                family, i, k = self._jet_of[body]
                result += coeff * self.jet(family, i, k - 1)
            elif body in self._jet_of and self._jet_of[body][0] == "u":
                result += coeff * self.w[self._jet_of[body][1] - 1]
            else:
                rest += term
        if rest != 0:
            result += self._nonlocal(rest)
        return result

    def _nonlocal(self, expr: Expr) -> Expr:
        sign = 1
        if expr.could_extract_minus_sign():
            expr, sign = -expr, -1
        z = self._z_memo.get(expr)
        if z is None:
            z = Symbol(f"z{len(self._z_defs) + 1}")
            self._z_defs[z] = expr
            self._z_memo[expr] = z
            logger.debug(f"new nonlocal symbol {z}: D {z} = {sstr(expr)}")
        return sign * z

    # -------------------------------------------------------------------------
    # Euler operator
    # -------------------------------------------------------------------------

    def _euler(self, weight: Expr, f: Expr, k: int) -> Expr:
        """δ/δu^k of ∫ weight·f dx with ``weight`` held fixed."""
        f = sympify(f)
        symbols = sorted(f.free_symbols, key=str)
        result = Integer(0)
        for s in symbols:
            key = self._jet_of.get(s)
            if key and key[0] == "u" and key[1] == k:
                term = weight * diff(f, s)
                for _ in range(key[2]):
                    term = -self.total_derivative(term)
                result += term
        w = self.w[k - 1]
        if w in f.free_symbols:
            result -= self.antiderivative(weight * diff(f, w))
        for z in symbols:
            if z in self._z_defs:
                Z = self.antiderivative(weight * diff(f, z))
                result -= self._euler(Z, self._z_defs[z], k)
        return expand(result)

    def variational_derivative(self, H: Any, k: int) -> DiffPoly:
        """
        δH/δu^k = Σ_j (-D)^j ∂h/∂u^k_j - D⁻¹(∂h/∂w^k) - (nonlocal-symbol terms).

        Args:
            H: HamiltonianFunctional or a density expression
            k: Component index, 1-based
        """
        if not 1 <= k <= self.n:
            raise ValidationError(f"Component {k} outside 1..{self.n}", "k")
        density = H.density if isinstance(H, HamiltonianFunctional) else sympify(H)
        return self._euler(Integer(1), density, k)


# =============================================================================
# OPERATORS
# =============================================================================

def _apply_chain(ring: DiffRing, chain: List[Any], f: Expr) -> Expr:
    for factor_ in reversed(chain):
        if isinstance(factor_, str) and factor_ == DERIVATIVE:
            f = ring.total_derivative(f)
        else:
            f = factor_ * f
    return f


def apply_operator(ring: DiffRing, J: OperatorExpr, xi: List[DiffPoly],
                   require_local: bool = True) -> List[DiffPoly]:
    """
    Apply J componentwise to ξ.

    Raises:
        DimensionMismatchError: If ξ has the wrong length
        NonlocalResidueError: If a nonlocal symbol survives in the result
    """
    if len(xi) != J.n:
        raise DimensionMismatchError(f"Operator is {J.n}x{J.n}, vector has {len(xi)} entries", "xi")
    inner = [sympify(f) for f in xi]
    for _ in range(J.post):
        inner = [ring.total_derivative(f) for f in inner]
    out = []
    for i in range(J.n):
        total = Integer(0)
        for j in range(J.n):
            for chain in J.entries[i][j]:
                total += _apply_chain(ring, chain, inner[j])
        for _ in range(J.pre):
            total = ring.total_derivative(total)
        total = cancel(together(total))
        if require_local and not ring.is_local(total):
            residue = sorted(str(s) for s in total.free_symbols if not ring.is_local(s))
            raise NonlocalResidueError(f"Component {i + 1} keeps nonlocal symbols {residue}", "operator")
        out.append(total)
    return out


def operator_from_metric(g: MongeMetric, name: str = "") -> OperatorExpr:
    """J = D(g^{ij} D + c^{ij}_k u^k_x) D for a flat-coordinate Monge metric."""
    ginv, cup = operator_coeffs(g)
    n = g.n
    u_x = [Symbol(f"u{k}_x") for k in range(1, n + 1)]
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            chains = []
            if ginv[i][j]:
                chains.append([ginv[i][j].as_expr(), DERIVATIVE])
            local = sum((cup[i][j][k].as_expr() * u_x[k] for k in range(n) if cup[i][j][k]), Integer(0))
            if local != 0:
                chains.append([local])
            row.append(chains)
        entries.append(row)
    return OperatorExpr(n, entries, pre=1, post=1, name=name or g.name)


def operator_from_matrix(rows: List[List[List[List[str]]]], ring: DiffRing, pre: int = 1,
                         post: int = 1, name: str = "") -> OperatorExpr:
    """
    Build an operator from chain text, e.g. [["D", "u2"], ["u2", "D"]] for D∘u² + u²∘D.
    """
    entries = []
    for row in rows:
        entries.append([[[f if f == DERIVATIVE else ring.parse(f) for f in chain] for chain in entry]
                        for entry in row])
    return OperatorExpr(len(rows), entries, pre=pre, post=post, name=name)


def operators_agree(J1: OperatorExpr, J2: OperatorExpr, ring: DiffRing) -> Verdict:
    """Compare two operators on generic test fields v¹..vⁿ."""
    if J1.n != J2.n:
        return Verdict(False, f"sizes {J1.n} and {J2.n} differ")
    if len(ring.v) < J1.n:
        raise ValidationError(f"Ring needs {J1.n} test fields to compare operators", "test_fields")
    a = apply_operator(ring, J1, ring.v[:J1.n])
    b = apply_operator(ring, J2, ring.v[:J1.n])
    for i, (p, q) in enumerate(zip(a, b)):
        difference = cancel(p - q)
        if difference != 0:
            return Verdict(False, sstr(difference), {'component': i + 1})
    return Verdict(True)


# =============================================================================
# HYDRODYNAMIC SYSTEMS
# =============================================================================

def hydro_system_from_strings(fluxes: List[str], ring: DiffRing, name: str = "") -> HydroSystem:
    if len(fluxes) != ring.n:
        raise DimensionMismatchError(f"Expected {ring.n} fluxes, got {len(fluxes)}", "flux")
    parsed = [ring.parse(f) for f in fluxes]
    for f in parsed:
        if not f.free_symbols <= set(ring.u) | set(ring.params):
            raise ValidationError(f"Flux {sstr(f)} must depend on u and parameters only", "flux")
    return HydroSystem(ring.n, parsed, list(ring.u), list(ring.params), name=name)


def check_hamiltonian_flow(ring: DiffRing, system: HydroSystem, J: OperatorExpr,
                           H: HamiltonianFunctional) -> Verdict:
    """
    J δH/δu = (V(u))_x identically.

    Raises:
        NonlocalResidueError: If J δH/δu is not local
    """
    if J.n != system.n:
        raise DimensionMismatchError(f"Operator is {J.n}x{J.n}, system has n={system.n}", "operator")
    xi = [ring.variational_derivative(H, k) for k in range(1, system.n + 1)]
    flow = apply_operator(ring, J, xi)
    for i in range(system.n):
        target = sum((diff(system.fluxes[i], system.coords[k]) * ring.u_x(k + 1) for k in range(system.n)),
                     Integer(0))
        difference = cancel(flow[i] - target)
        if difference != 0:
            return Verdict(False, sstr(difference), {'component': i + 1})
    logger.info(f"check_hamiltonian_flow: system '{system.name}' is Hamiltonian")
    return Verdict(True)


def haantjes_tensor(system: HydroSystem) -> Dict[Tuple[int, int, int], Expr]:
    """
    Nonzero components H^i_{jk}, j < k (0-based), of the Haantjes tensor of A = ∂V/∂u.
    """
    n = system.n
    A = system.characteristic_matrix().applyfunc(cancel)
    u = system.coords
    dA = [[[cancel(diff(A[i, j], u[p])) for p in range(n)] for j in range(n)] for i in range(n)]
    N = [[[Integer(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                value = Integer(0)
                for p in range(n):
                    value += A[p, j] * dA[i][k][p] - A[p, k] * dA[i][j][p]
                    value -= A[i, p] * (dA[p][k][j] - dA[p][j][k])
                value = cancel(value)
                N[i][j][k] = value
                N[i][k][j] = -value
    result = {}
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                value = Integer(0)
                for p in range(n):
                    for r in range(n):
                        value += A[i, p] * A[p, r] * N[r][j][k]
                        value -= A[i, p] * N[p][r][k] * A[r, j]
                        value -= A[i, p] * N[p][j][r] * A[r, k]
                        value += N[i][p][r] * A[p, j] * A[r, k]
                value = cancel(value)
                if value != 0:
                    result[(i, j, k)] = value
    return result


def diagonalisability_conditions(system: HydroSystem) -> List[Expr]:
    """
    Polynomial conditions on the parameters for the Haantjes tensor to vanish.

    Each condition is a coefficient (in u) of a cleared Haantjes numerator,
    factored; an empty list means the tensor vanishes identically.
    """
    conditions = {}
    for value in haantjes_tensor(system).values():
        numerator, _ = fraction(together(value))
        for coeff in SymPoly(expand(numerator), *system.coords).coeffs():
            condition = factor(coeff)
            if condition.could_extract_minus_sign():
                condition = -condition
            conditions[sstr(condition)] = condition
    return [conditions[key] for key in sorted(conditions)]


def is_diagonalisable(system: HydroSystem, values: Optional[Dict[str, Any]] = None) -> Verdict:
    """
    Haantjes-tensor test; with ``values`` the conditions are evaluated at that
    parameter point, otherwise they must vanish identically.
    """
    conditions = diagonalisability_conditions(system)
    subs = {Symbol(k): SymRational(str(v)) for k, v in (values or {}).items()}
    failing = [c for c in conditions if cancel(c.subs(subs)) != 0]
    details = {'conditions': [sstr(c) for c in conditions]}
    if failing:
        return Verdict(False, sstr(failing[0]), details)
    return Verdict(True, None, details)


def diagonalisability_ideal_check(system: HydroSystem, generator: Expr) -> Verdict:
    """
    Every diagonalisability condition is a polynomial multiple of ``generator``,
    so the system diagonalises wherever ``generator`` vanishes.
    """
    generator = sympify(generator)
    if generator == 0:
        raise ValidationError("Ideal generator must be nonzero", "diagonalisability_ideal")
    conditions = diagonalisability_conditions(system)
    details = {'generator': sstr(generator), 'conditions': [sstr(c) for c in conditions]}
    if not conditions:
        return Verdict(False, "Haantjes tensor vanishes identically", details)
    gens = sorted(set().union(generator.free_symbols, *(c.free_symbols for c in conditions)), key=str)
    for c in conditions:
        _, remainder = div(expand(c), expand(generator), *gens)
        if remainder != 0:
            return Verdict(False, f"{sstr(c)} leaves remainder {sstr(remainder)}", details)
    return Verdict(True, None, details)


def is_linearly_degenerate(system: HydroSystem) -> Verdict:
    """
    Σ_k ∇c_k · A^k = 0 for det(λI - A) = λⁿ + Σ_{k<n} c_k λ^k.
    """
    n = system.n
    A = system.characteristic_matrix().applyfunc(cancel)
    lam = Symbol("lam")
    coeffs = A.charpoly(lam).all_coeffs()
    u = system.coords
    L = zeros(1, n)
    power = eye(n)
    for k in range(n):
        c_k = cancel(coeffs[n - k])
        grad = SymMatrix([[diff(c_k, u[p]) for p in range(n)]])
        L += grad * power
        power = (power * A).applyfunc(cancel)
    for j in range(n):
        value = cancel(L[0, j])
        if value != 0:
            return Verdict(False, sstr(value), {'component': j + 1})
    return Verdict(True)


# =============================================================================
# EXAMPLE FAMILY AND SYSTEM BUNDLES
# =============================================================================

def example6_family(n: int) -> Dict[str, Any]:
    """
    The n-component system u^i_t = u^{i+1}_x (i < n), u^n_t = ((u²)² - u¹u³)_x
    with its density and generating metric, as catalog-style text.
    """
    n = validate_integer(n, "n", min_value=3, max_value=12)
    flux = [f"u{i + 1}" for i in range(1, n)] + ["u2^2 - u1*u3"]
    pairs = " + ".join(f"w{m}*w{n + 2 - m}" for m in range(2, n + 1))
    density = f"-1/2*u1*w2^2 - 1/2*({pairs})"
    g = [["0"] * n for _ in range(n)]
    for i in range(n):
        g[i][n - 1 - i] = "1"
    g[0][0] = "-2*u2" if g[0][0] == "0" else f"{g[0][0]} - 2*u2"
    g[0][1] = g[1][0] = "u1" if g[0][1] == "0" else f"{g[0][1]} + u1"
    return {
        'n': n,
        'params': [],
        'flux': flux,
        'hamiltonian_density': density,
        'metric_inline': {'n': n, 'g': g},
    }


@dataclass
class HydroBundle:
    """A system with its ring, Hamiltonian, generating metric and displayed operator."""

    ring: DiffRing
    system: HydroSystem
    hamiltonian: HamiltonianFunctional
    metric: Optional[MongeMetric] = None
    displayed: Optional[OperatorExpr] = None


def system_from_dict(data: Dict[str, Any], metric: Optional[MongeMetric] = None,
                     name: str = "", values: Optional[Dict[str, Any]] = None) -> HydroBundle:
    """
    Build a HydroBundle from ``{"n", "params", "flux", "hamiltonian_density", "operator"?}``.

    The metric is resolved by the caller (inline or catalog reference);
    ``values`` substitutes rationals for parameters in fluxes and density.
    """
    n = validate_integer(data.get('n'), "n", min_value=1, max_value=12)
    params = tuple(data.get('params', []))
    ring = DiffRing(n, params, test_fields=n)
    flux = data.get('flux')
    if not isinstance(flux, list):
        raise ValidationError("flux must be a list of expressions", "flux")
    system = hydro_system_from_strings([str(f) for f in flux], ring, name=name)
    density = data.get('hamiltonian_density')
    if density is None:
        raise ValidationError("hamiltonian_density is required", "hamiltonian_density")
    H = HamiltonianFunctional(ring.parse(str(density)), name=name)
    subs = {Symbol(k): SymRational(str(v)) for k, v in (values or {}).items() if k in params}
    if subs:
        system = HydroSystem(n, [f.subs(subs) for f in system.fluxes], system.coords, system.params, name=name)
        H = HamiltonianFunctional(H.density.subs(subs), name=name)
    displayed = None
    if data.get('operator') is not None:
        displayed = operator_from_matrix(data['operator'], ring, name=f"{name}-displayed")
    if metric is not None and metric.n != n:
        raise DimensionMismatchError(f"Metric has n={metric.n}, system has n={n}", "metric")
    return HydroBundle(ring, system, H, metric, displayed)


def check_system(bundle: HydroBundle, diagonal_point: Optional[Dict[str, Any]] = None) -> SystemCheck:
    """Run the Hamiltonian-flow, degeneracy and diagonalisability diagnostics on a bundle."""
    result = SystemCheck()
    if bundle.metric is not None:
        J = operator_from_metric(bundle.metric)
        try:
            verdict = check_hamiltonian_flow(bundle.ring, bundle.system, J, bundle.hamiltonian)
            result.hamiltonian = verdict.passed
            result.witness = verdict.witness
        except NonlocalResidueError as e:
            logger.info(f"check_system: '{bundle.system.name}' leaves a nonlocal residue")
            result.hamiltonian = False
            result.witness = f"{type(e).__name__}: {e.message}"
        if bundle.displayed is not None:
            result.metric_matches = operators_agree(J, bundle.displayed, bundle.ring).passed
    result.linearly_degenerate = is_linearly_degenerate(bundle.system).passed
    diag = is_diagonalisable(bundle.system, diagonal_point)
    result.diagonalisable_generic = diag.passed
    result.diagonalisability_conditions = diag.details['conditions']
    return result
