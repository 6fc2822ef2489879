"""Walk along the closed family G_s: torsion, Laplacian, soliton data and F.

    python demos/shrinking_family.py
"""

from fractions import Fraction

from g2forge import family, solitons
from g2forge.exterior import PHI
from g2forge.g2core import compute_torsion, hodge_laplacian

for s in (Fraction(0), Fraction(1, 4), Fraction(5, 8), Fraction(1)):
    spec = family.gs(s)
    st = spec.structure()
    tau = compute_torsion(st)
    print(f"s = {s}")
    print(f"  closed: {st.dphi.is_zero(0)}")
    print(f"  tau2 = {tau.tau2}")
    print(f"  Delta phi = {hodge_laplacian(st, PHI)}")

    # least squares over Der(g), then snapped back to exact fractions
    sol = solitons.solve_laplacian_soliton(spec.to_float().structure())
    exact = solitons.rationalize_soliton(st, solitons.solve_laplacian_soliton(st))
    c = exact[0] if exact else sol.c
    print(f"  soliton c = {c} ({sol.classification}), closed form {family.gs_soliton_data(s)[0]}")
    if sol.singularity_time is not None:
        print(f"  finite-time singularity at T = {-3 / (2 * c)}")
    print(f"  F = {family.pinching_functional(spec)}  (closed form {family.F_gs(s)})")

# the only Ricci soliton on the family
for s in (Fraction(1, 2), Fraction(5, 8), Fraction(3, 4)):
    r = solitons.solve_ricci_soliton(family.gs(s).to_float())
    print(f"Ric = c id + D at s = {s}: residual {r.residual:.3g}, c = {r.c:.6g}")
