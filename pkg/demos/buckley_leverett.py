"""
Nonconvex flux: Buckley-Leverett displacement
=============================================

No closed form is used here; the reference is a fine Godunov
finite-volume solution.  The DG front approaches it under refinement.
"""

import numpy as np

from stdg import RunState, Scheme, advance, make_flux, parse_initial_data, reference_solution
from stdg.oracle import final_trace_error

T = 0.3
flux = make_flux("buckley", m=0.5)
u0 = parse_initial_data("riemann(1, 0, -0.5)")
ref = reference_solution(flux, u0, T, -1.0, 1.0, 64)
print(f"reference: {ref.source}")

for n_x in (16, 32, 64):
    run = advance(RunState(u0, Scheme(flux, q=1), -1.0, 1.0, n_x), T)
    l1, _ = final_trace_error(run, ref.fun, ref.breakpoints)
    x = np.linspace(-1, 1, 9)
    print(f"n_x = {n_x:3d}  L1 = {l1:.3e}  u_h(T) = "
          + " ".join(f"{v:.2f}" for v in run.slabs[-1].top_trace(x)))
