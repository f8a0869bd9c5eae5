"""
Data models for hydrodynamic-type systems and their Hamiltonian structures.

Differential expressions are sympy expressions in x, the jet symbols
u{i}, u{i}_x, u{i}_xx, ..., the antiderivatives w{i} (D w{i} = u{i}) and
named nonlocal symbols z{k}; see ``tools.diffvar.DiffRing``.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Any, Union

from sympy import Expr, Matrix as SymMatrix, Symbol, diff, sstr

from utils.validation import DimensionMismatchError

DiffPoly = Expr

# One factor of a composition chain: the string "D" or a multiplier.
ChainFactor = Union[str, Expr]


@dataclass
class HamiltonianFunctional:
    """H = ∫ h dx with a (possibly nonlocal) density h."""

    density: DiffPoly
    name: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {'hamiltonian_density': sstr(self.density)}


@dataclass
class OperatorExpr:
    """
    Matrix differential operator D^pre ∘ (entries) ∘ D^post.

    ``entries[i][j]`` is a sum of chains; a chain is a list of factors
    applied right to left, each factor either "D" or a multiplier.
    """

    n: int
    entries: List[List[List[List[ChainFactor]]]]
    pre: int = 0
    post: int = 0
    name: str = ""

    def __post_init__(self):
        if len(self.entries) != self.n or any(len(r) != self.n for r in self.entries):
            raise DimensionMismatchError(f"Operator must be {self.n}x{self.n}", "operator")

    def to_dict(self) -> Dict[str, Any]:
        def chain_text(chain):
            return [f if isinstance(f, str) else sstr(f) for f in chain]

        return {
            'n': self.n,
            'pre': self.pre,
            'post': self.post,
            'entries': [[[chain_text(c) for c in entry] for entry in row] for row in self.entries],
        }


@dataclass
class HydroSystem:
    """u^i_t = (V^i(u))_x with rational fluxes."""

    n: int
    fluxes: List[Expr]
    coords: List[Symbol]
    params: List[Symbol] = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        if len(self.fluxes) != self.n or len(self.coords) != self.n:
            raise DimensionMismatchError(f"System needs {self.n} fluxes and coordinates", "flux")

    def characteristic_matrix(self) -> SymMatrix:
        """A^i_j = ∂V^i/∂u^j."""
        return SymMatrix(self.n, self.n, lambda i, j: diff(self.fluxes[i], self.coords[j]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'params': [str(p) for p in self.params],
            'flux': [sstr(f) for f in self.fluxes],
        }


@dataclass
class SystemCheck:
    """Summary of the diagnostics run on one hydrodynamic system."""

    hamiltonian: Optional[bool] = None
    linearly_degenerate: Optional[bool] = None
    diagonalisable_generic: Optional[bool] = None
    diagonalisability_conditions: List[str] = field(default_factory=list)
    metric_matches: Optional[bool] = None
    witness: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'hamiltonian': self.hamiltonian,
            'linearly_degenerate': self.linearly_degenerate,
            'diagonalisable_generic': self.diagonalisable_generic,
            'diagonalisability_conditions': self.diagonalisability_conditions,
            'metric_matches': self.metric_matches,
            'witness': self.witness,
        }
