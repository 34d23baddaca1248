"""
Burgers Riemann problems: a shock and a rarefaction
===================================================

March the space-time DG scheme on a refinement ladder and compare the
final trace with the exact entropy solution.
"""

import numpy as np

from stdg import RunState, Scheme, advance, make_flux, parse_initial_data, reference_solution
from stdg.oracle import RiemannProblem, expansion_shock, final_trace_error

T = 0.5
burgers = make_flux("burgers")
scheme = Scheme(burgers, q=1)

# a > b gives a shock moving at (a + b) / 2, a < b a rarefaction fan
for spec in ("riemann(1, 0, 0)", "riemann(0, 1, 0)"):
    u0 = parse_initial_data(spec)
    ref = reference_solution(burgers, u0, T, -1.0, 1.0, 128)
    print(spec)
    prev = None
    for n_x in (16, 32, 64, 128):
        run = advance(RunState(u0, scheme, -1.0, 1.0, n_x), T)
        l1, _ = final_trace_error(run, ref.fun, ref.breakpoints)
        rate = "" if prev is None else f"  order {np.log2(prev / l1):.2f}"
        print(f"  n_x = {n_x:4d}  L1 = {l1:.3e}{rate}")
        prev = l1

# the rarefaction run stays away from the non-entropic expansion shock
rp = RiemannProblem(0.0, 1.0)
run = advance(RunState(parse_initial_data("riemann(0, 1, 0)"), scheme, -1.0, 1.0, 128), T)
d, _ = final_trace_error(run, lambda x: expansion_shock(rp, T, x), (0.5 * T,))
print(f"distance to the expansion shock: {d:.4f} (the fan itself is {0.25 * T:.4f} away)")
