"""Zero initial data and the weakly singular forcing ``t^-0.8 / Gamma(0.2)``.

The operator is ``D^1.5 + t^2 D^0.5 + t^3``. Each Neumann increment is
printed separately: later layers share exponents with earlier ones, so the
summed series hides the layer structure.
"""

import itertools

from numpy.polynomial import Polynomial

from fracgreen import (
    GeneralizedPowerSeries,
    OperatorSpec,
    gamma,
    inhomogeneous_increments,
    inhomogeneous_solution,
    rl_integral,
    verify_solution,
)

op = OperatorSpec((1.5, 0.5, 0.0), (Polynomial([0, 0, 1]), Polynomial([0, 0, 0, 1])))
h = GeneralizedPowerSeries.monomial(1 / gamma(0.2), -0.8)

layers = [rl_integral(h, op.alpha0)]
layers += itertools.islice(inhomogeneous_increments(op, h), 3)
for k, layer in enumerate(layers):
    body = "  ".join(f"{t.coeff:+.10e} t^{t.exponent:g}" for t in layer.terms)
    print(f"layer {k}: {body}")

y = inhomogeneous_solution(op, h)
print(f"\nsummed series: {len(y.terms)} terms, y(1) = {y(1.0):.15f}")
print(verify_solution(op, y, h).render())
