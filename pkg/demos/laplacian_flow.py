"""Integrate the Laplacian flow from G_0 and compare with the self-similar solution.

    python demos/laplacian_flow.py
"""

import numpy as np

from g2forge import family, solitons
from g2forge.exterior import PHI

st = family.gs(0).structure()
sol = solitons.solve_laplacian_soliton(st)
print(f"c = {sol.c:.6g}, expected singular time T = {solitons.singularity_time(sol.c):.6g}")

run = solitons.flow_integrate(st, 0.5, 1e-3, sample_every=100)
print(f"{'t':>6} {'rel. error':>12} {'|Delta phi|':>12} {'margin':>8}")
for state in run.states:
    ref = solitons.reconstruct_soliton_flow(PHI, sol.c, sol.D, state.t)
    err = np.linalg.norm(state.coefficients - ref) / np.linalg.norm(ref)
    print(f"{state.t:6.3f} {err:12.3e} {state.laplacian_norm:12.4g} {state.margin:8.4f}")

blow = solitons.flow_integrate(st, 0.85, 1e-3, sample_every=1000)
print(f"|Delta phi| passes 1e6 at t = {blow.blowup_time}")
