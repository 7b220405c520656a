"""Green's function of ``D^1.5 + t D^0.5``: exact series against the grid solver.

Prints the leading terms of the bivariate series, a few values next to the
grid solution for the same ``tau`` section, and a verification report.
"""

import numpy as np
from numpy.polynomial import Polynomial

from fracgreen import (
    GradedGrid,
    OperatorSpec,
    TruncationPolicy,
    green_on_grid,
    greens_function,
    verify_green,
)

op = OperatorSpec((1.5, 0.5), (Polynomial([0.0, 1.0]),))
G = greens_function(op, TruncationPolicy(target_T=2.0))

print(f"{len(G.terms)} terms; leading ones:")
for term in G.terms[:5]:
    print(f"  {term.coeff:+.12f} * tau^{term.tau_exp} * (t - tau)^{term.s_exp:g}")

tau = 0.5
grid = GradedGrid(1.5, 4096, 2.0)
section = green_on_grid(op, tau, grid)
print(f"\n{'t':>6} {'series':>18} {'grid':>18} {'rel. diff':>10}")
for t in (0.6, 0.8, 1.0, 1.5, 2.0):
    exact = G(t, tau)
    approx = float(section(np.array([t - tau]))[0])
    print(f"{t:6.2f} {exact:18.12f} {approx:18.12f} {abs(approx / exact - 1):10.2e}")

print()
print(verify_green(op, G, [0.25, 0.5, 1.0]).render())
