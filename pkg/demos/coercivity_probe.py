"""
Coercivity of the projected diffusion form
==========================================

For random polynomials v on random triangles the ratio
int |grad v^(p/2)|^2 / int grad v . grad Pi(v^(p-1)) stays bounded, and
the bound does not move when the triangle is shrunk by half.
"""

from stdg.diagnostics import sc_coercivity_probe

for q in (1, 2, 3):
    for p in (2, 4, 6):
        pr = sc_coercivity_probe(q, p, n_trials=300, seed=1)
        print(f"q = {q}  p = {p}  max ratio {pr.max_ratio:8.4f}  "
              f"halved {pr.max_ratio_half:8.4f}  min denominator {pr.min_denominator:.2e}")
