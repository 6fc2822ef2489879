"""G2-structures on seven-dimensional solvable Lie algebras.

Modules: :mod:`exterior` (forms, Hodge star, theta), :mod:`liealg`
(brackets, Chevalley-Eilenberg differential, derivations), :mod:`g2core`
(metric, torsion, Laplacian, Ricci), :mod:`family` (the G_{A1,A,B,C}
family and its closed-form expressions), :mod:`solitons` (soliton solvers
and the Laplacian flow) and :mod:`cli`.
"""

from .exterior import PHI, VOL, KForm, e, hodge_star, inner, wedge
from .family import FamilySpec, build_family_instance, fr, gs, sa
from .g2core import G2Structure, compute_torsion, hodge_laplacian
from .liealg import LieAlgebra, ce_differential

__version__ = "0.1.0"

__all__ = [
    "PHI", "VOL", "KForm", "e", "hodge_star", "inner", "wedge",
    "FamilySpec", "build_family_instance", "fr", "gs", "sa",
    "G2Structure", "compute_torsion", "hodge_laplacian",
    "LieAlgebra", "ce_differential",
]
