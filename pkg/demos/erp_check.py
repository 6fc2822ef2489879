"""Test the extremally Ricci pinched condition on the steady soliton and on FR.

    python demos/erp_check.py
"""

import math

from g2forge import family
from g2forge.g2core import erp_residual

cases = (("G_{sqrt(15)/8}", family.gs(math.sqrt(15) / 8)), ("FR", family.fr()))
for name, spec in cases:
    res = erp_residual(spec.structure())
    print(name)
    print(f"  d tau                       = {res.lhs}")
    print(f"  (|tau|^2 phi + *(tau^tau))/6 = {res.rhs}")
    print(f"  residual {float(res.residual):.4g}: {'ERP' if res.residual < 1e-9 else 'not ERP'}")
    print(f"  F = {float(family.pinching_functional(spec)):.6g} (ERP structures have F = 3)")
