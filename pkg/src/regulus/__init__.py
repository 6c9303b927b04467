"""Exact derivations and 2-local derivations on regular algebras.

The algebra is a finite product of fields Q(i)(x_1, ..., x_m), one per atom
of a finite measured Boolean algebra.  Submodules:

``lattice``      idempotents, measure and the metric rho
``algebra``      regular elements, support, pseudo-inverse, Jacobian test
``derivations``  derivations as per-atom combinations of partials
``matrix``       M_n(A), inner plus entrywise derivations, decomposition
``twolocal``     2-local maps, the non-additive example, linearization
``session``      the expression language and command layer behind the CLI
"""

from .algebra import Algebra, RegularElement, jacobian_independent, pinv, support
from .derivations import AbelianDerivation, extend_with_value
from .lattice import AtomSpace, Idempotent, measure, rho
from .matrix import MatrixDerivation, MatrixElement, apply_matrix_derivation, decompose
from .twolocal import TwoLocalMap, build_counterexample, certify_pair, from_derivation, linearize

__version__ = "0.1.0"

__all__ = [
    "AtomSpace",
    "Idempotent",
    "measure",
    "rho",
    "Algebra",
    "RegularElement",
    "support",
    "pinv",
    "jacobian_independent",
    "AbelianDerivation",
    "extend_with_value",
    "MatrixElement",
    "MatrixDerivation",
    "apply_matrix_derivation",
    "decompose",
    "TwoLocalMap",
    "from_derivation",
    "certify_pair",
    "build_counterexample",
    "linearize",
]
