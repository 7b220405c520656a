"""A non-polynomial coefficient: ``D^0.8 y + sin(t) D^0.3 y = 0`` on a graded grid.

The symbolic path needs polynomial coefficients, so the successive
approximation on a graded grid is used; the defect history shows the
iteration converging, and halving the mesh shows second-order accuracy.
"""

import numpy as np

from fracgreen import (
    GradedGrid,
    OperatorSpec,
    default_grading,
    successive_approximation,
    verify_solution,
)

op = OperatorSpec((0.8, 0.3), (np.sin,))
r = default_grading(op.alpha0)

history = []
y = successive_approximation(op, GradedGrid(1.0, 4096, r), history=history)
print(f"{len(history)} iterations; defects: " + ", ".join(f"{d:.1e}" for d in history[:8]))

print(f"\n{'N':>6} {'y(1)':>20} {'change':>10}")
prev = None
for N in (512, 1024, 2048, 4096):
    value = successive_approximation(op, GradedGrid(1.0, N, r)).values[-1]
    change = "" if prev is None else f"{abs(value - prev):10.2e}"
    print(f"{N:6d} {value:20.15f} {change}")
    prev = value

print()
print(verify_solution(op, y, leading_exponent=op.alpha0 - 1).render())
