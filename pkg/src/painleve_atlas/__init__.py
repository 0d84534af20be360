"""Symbolic-numeric analysis of Painleve-type Hamiltonian systems.

The package fits quasihomogeneous weights from Newton polyhedra, compactifies
phase space into weighted projective charts, expands movable-pole series,
transports them through Backlund maps, resolves the pole divisor into a
symplectic atlas of holomorphic Hamiltonians, and integrates paths numerically
with chart switching across that atlas.
"""

from .expr import Expr, Symbol, differentiate, normalize_arith, serialize, substitute_eval
from .parsing import parse_expr

__version__ = "0.1.0"

__all__ = [
    "Expr",
    "Symbol",
    "differentiate",
    "normalize_arith",
    "parse_expr",
    "serialize",
    "substitute_eval",
    "__version__",
]
