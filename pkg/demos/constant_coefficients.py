"""Constant coefficients: Neumann series, Mittag-Leffler closed forms and exp.

For ``D^alpha0 y + A y = 0`` with unit data the solution is
``t^(alpha0-1) E_{alpha0,alpha0}(-A t^alpha0)``; ``alpha0 = 1`` gives
``exp(-A t)``.
"""

import numpy as np

from fracgreen import (
    OperatorSpec,
    constant_coeff_solution,
    constant_coeff_solution_ml,
    homogeneous_solution,
    ml_two_param,
)

print(f"{'alpha0':>6} {'t':>5} {'series (exact)':>20} {'regrouped ML':>20} {'E_a,a form':>20}")
for alpha0 in (0.6, 1.0, 1.5, 2.3):
    op = OperatorSpec((alpha0, 0.0), (1.0,))
    y = homogeneous_solution(op)
    for t in (0.5, 1.0):
        ml = t ** (alpha0 - 1) * ml_two_param(alpha0, alpha0, -t**alpha0)
        print(f"{alpha0:6.2f} {t:5.2f} {y(t):20.15f} {constant_coeff_solution_ml(op, t):20.15f}"
              f" {ml:20.15f}")

op = OperatorSpec((1.0, 0.0), (2.0,))
t = np.linspace(0.5, 3.0, 6)
err = np.max(np.abs(constant_coeff_solution(op, t) / np.exp(-2 * t) - 1))
print(f"\ny' + 2y = 0, y(0) = 1 on (0, 3]: max relative error vs exp(-2t) = {err:.2e}")

op = OperatorSpec((1.5, 0.5, 0.0), (1.0, 0.5))
print(f"three-term operator at t = 1: {constant_coeff_solution(op, 1.0):.15f}"
      f" (regrouped: {constant_coeff_solution_ml(op, 1.0):.15f})")
