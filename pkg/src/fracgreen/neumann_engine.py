r"""Truncated Neumann series for fractional operators with variable coefficients.

The operator is

.. math::

    L(D) = D^{\alpha_0} + \sum_{h=1}^m a_h(t) D^{\alpha_h},
    \qquad \alpha_0 > \alpha_1 > \dots > \alpha_m \ge 0,

with Riemann-Liouville derivatives. Writing :math:`F = D^{\alpha_0} y`, the
problem :math:`L(D)y = f` with zero (or unit) initial data turns into the
second-kind equation :math:`F + \mathcal{K}F = f`, where
:math:`\mathcal{K} = \sum_h a_h I^{\alpha_0-\alpha_h}`. Its Neumann series
:math:`F = \sum_k (-1)^k \mathcal{K}^k f` is summed exactly in the power
series algebra of :mod:`fracgreen.power_algebra` when every :math:`a_h` is a
polynomial.

For constant coefficients the series collapses to a multivariate
Mittag-Leffler function, evaluated directly by :func:`constant_coeff_solution`
and, regrouped around the first coefficient, by
:func:`constant_coeff_solution_ml`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from fracgreen.exceptions import TruncationError
from fracgreen.power_algebra import (
    BivariatePowerSeries,
    GeneralizedPowerSeries,
    bi_poly_multiply,
    bi_rl_integral,
    poly_coefficients,
    poly_multiply,
    rl_derivative,
    rl_integral,
    shift_polynomial,
)
from fracgreen.special_functions import (
    MLParams,
    compositions,
    ml_multivariate,
    ml_two_param_deriv,
    rgamma,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MultiIndex",
    "OperatorSpec",
    "Sampled",
    "TruncationPolicy",
    "apply_operator",
    "coefficient_sup",
    "constant_coeff_green",
    "constant_coeff_solution",
    "constant_coeff_solution_ml",
    "greens_function",
    "green_section",
    "greens_increments",
    "homogeneous_increments",
    "homogeneous_solution",
    "inhomogeneous_increments",
    "inhomogeneous_solution",
    "majorant_bound",
]


# {{{ operator description


@dataclass(frozen=True)
class Sampled:
    """A continuous coefficient known only through a callable or a table.

    Exactly one of *func* and *table* is given. A table ``(t, values)`` is
    linearly interpolated.
    """

    func: Callable | None = None
    table: tuple[np.ndarray, np.ndarray] | None = None
    #: human readable form, used when rendering problem specs
    label: str = ""

    def __post_init__(self):
        if (self.func is None) == (self.table is None):
            raise ValueError("give exactly one of func and table")

    def __call__(self, t):
        if self.func is not None:
            return np.broadcast_to(np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float),
                                   np.shape(t)).astype(float)
        x, v = self.table
        return np.interp(t, x, v)


def _as_coefficient(c):
    if isinstance(c, (np.polynomial.Polynomial, Sampled)):
        return c
    if isinstance(c, (int, float)):
        return np.polynomial.Polynomial([float(c)])
    if callable(c):
        return Sampled(func=c)
    return np.polynomial.Polynomial(np.asarray(c, dtype=float))


@dataclass(frozen=True)
class OperatorSpec:
    r"""Orders :math:`(\alpha_0, \dots, \alpha_m)` and coefficients :math:`a_1..a_m`.

    Coefficients may be :class:`numpy.polynomial.Polynomial` instances,
    numbers, ascending coefficient sequences, callables or :class:`Sampled`.
    """

    orders: tuple[float, ...]
    coeffs: tuple = ()

    def __post_init__(self):
        orders = tuple(float(a) for a in self.orders)
        coeffs = tuple(_as_coefficient(c) for c in self.coeffs)
        if not orders:
            raise ValueError("at least the leading order alpha_0 is required")
        if not orders[0] > 0:
            raise ValueError(f"alpha_0 must be positive, got {orders[0]}")
        if any(not a > b for a, b in zip(orders, orders[1:])):
            raise ValueError(f"orders must be strictly decreasing, got {orders}")
        if orders[-1] < 0:
            raise ValueError(f"orders must be nonnegative, got {orders}")
        if len(coeffs) != len(orders) - 1:
            raise ValueError(f"{len(orders) - 1} coefficients expected, got {len(coeffs)}")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def alpha0(self) -> float:
        return self.orders[0]

    @property
    def m(self) -> int:
        return len(self.coeffs)

    @property
    def n0(self) -> int:
        """Integer with ``n0 - 1 < alpha_0 <= n0``."""
        return math.ceil(self.alpha0)

    @property
    def gaps(self) -> tuple[float, ...]:
        r""":math:`\alpha_0 - \alpha_h` for ``h = 1..m``."""
        return tuple(self.alpha0 - a for a in self.orders[1:])

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(c, np.polynomial.Polynomial) for c in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return self.is_polynomial and all(
            np.all(poly_coefficients(c)[1:] == 0.0) for c in self.coeffs
        )

    @property
    def constants(self) -> tuple[float, ...]:
        if not self.is_constant:
            raise ValueError("operator coefficients are not constant")
        return tuple(float(poly_coefficients(c)[0]) for c in self.coeffs)

    def coeff_values(self, h: int, t) -> np.ndarray:
        """Values of ``a_{h+1}`` (zero based ``h``) at ``t``."""
        c = self.coeffs[h]
        t = np.asarray(t, dtype=float)
        if isinstance(c, np.polynomial.Polynomial):
            return np.asarray(c(t), dtype=float) * np.ones_like(t)
        return c(t)

    def shifted(self, origin: float) -> OperatorSpec:
        """Same orders, coefficients ``t -> a_h(origin + t)``."""
        if origin == 0.0:
            return self
        new = []
        for c in self.coeffs:
            if isinstance(c, np.polynomial.Polynomial):
                new.append(np.polynomial.Polynomial(shift_polynomial(c, origin)))
            else:
                new.append(Sampled(func=lambda t, c=c: c(np.asarray(t) + origin)))
        return OperatorSpec(self.orders, tuple(new))


@dataclass(frozen=True)
class TruncationPolicy:
    """When to stop summing a Neumann series."""

    #: maximum number of Neumann increments (layers k = 0 .. max_terms - 1)
    max_terms: int = 200
    #: horizon on which increments are measured
    target_T: float = 1.0
    #: stop once an increment's absolute-coefficient bound on [0, T] is below this
    tail_tol: float = 1e-15
    #: also require the majorant tail beyond the retained layers below tail_tol
    use_majorant: bool = False
    #: raise TruncationError (with the partial sum attached) on failure
    strict: bool = True

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        if not self.target_T > 0:
            raise ValueError("target_T must be positive")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index of nonnegative integers enumerated under layer ``|beta|``."""

    beta: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if any(int(b) != b or b < 0 for b in self.beta):
            raise ValueError(f"multi-index entries must be nonnegative integers: {self.beta}")
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))

    @property
    def order(self) -> int:
        return sum(self.beta)

    @classmethod
    def layer(cls, k: int, m: int) -> Iterator[MultiIndex]:
        for beta in compositions(k, m):
            yield cls(beta)


# }}}

# {{{ symbolic engine


def _require_polynomial(op: OperatorSpec) -> None:
    if not op.is_polynomial:
        raise ValueError("the symbolic engine needs polynomial coefficients")


def _apply_kernel(op: OperatorSpec, x: GeneralizedPowerSeries) -> GeneralizedPowerSeries:
    # K x = sum_h a_h I^(alpha0 - alpha_h) x
    out = GeneralizedPowerSeries((), x.origin, x.max_terms)
    for c, gap in zip(op.coeffs, op.gaps):
        out = out + poly_multiply(rl_integral(x, gap), c)
    return out


def _bi_apply_kernel(op: OperatorSpec, x: BivariatePowerSeries) -> BivariatePowerSeries:
    out = BivariatePowerSeries((), x.max_terms)
    for c, gap in zip(op.coeffs, op.gaps):
        out = out + bi_poly_multiply(bi_rl_integral(x, gap), c)
    return out


def _homogeneous_forcing(op: OperatorSpec) -> GeneralizedPowerSeries:
    # sum_h a_h t^(alpha0 - alpha_h - 1) / Gamma(alpha0 - alpha_h)
    g = GeneralizedPowerSeries()
    for c, gap in zip(op.coeffs, op.gaps):
        g = g + poly_multiply(GeneralizedPowerSeries.monomial(rgamma(gap), gap - 1.0), c)
    return g


def _bi_homogeneous_forcing(op: OperatorSpec) -> BivariatePowerSeries:
    g = BivariatePowerSeries()
    for c, gap in zip(op.coeffs, op.gaps):
        g = g + bi_poly_multiply(BivariatePowerSeries(((rgamma(gap), 0, gap - 1.0),)), c)
    return g


def homogeneous_increments(op: OperatorSpec) -> Iterator[GeneralizedPowerSeries]:
    r"""Yield the Neumann increments :math:`(-1)^{k+1} I^{\alpha_0}\mathcal{K}^k g`.

    ``g`` is the image of the leading term :math:`t^{\alpha_0-1}/\Gamma(\alpha_0)`
    under :math:`\sum_h a_h D^{\alpha_h}`. The generator is infinite unless
    an increment vanishes identically.
    """
    _require_polynomial(op)
    f = -_homogeneous_forcing(op)
    while f:
        yield rl_integral(f, op.alpha0)
        f = -_apply_kernel(op, f)


def greens_increments(op: OperatorSpec) -> Iterator[BivariatePowerSeries]:
    """Bivariate analogue of :func:`homogeneous_increments` with origin ``tau``."""
    _require_polynomial(op)
    f = -_bi_homogeneous_forcing(op)
    while f:
        yield bi_rl_integral(f, op.alpha0)
        f = -_bi_apply_kernel(op, f)


def _sum_increments(leading, increments, policy: TruncationPolicy, majorant_tail=None):
    total = leading
    last = math.inf
    for k, inc in enumerate(increments):
        if k >= policy.max_terms:
            break
        total = total + inc
        last = inc.abs_bound(policy.target_T)
        if last < policy.tail_tol and (majorant_tail is None or majorant_tail(k) < policy.tail_tol):
            logger.debug("neumann series converged after %d increments (%.3g)", k + 1, last)
            return total
    else:
        # the increments vanished identically: the sum is exact
        return total
    msg = (
        f"Neumann series not converged after {policy.max_terms} increments: "
        f"last increment bound {last:.3g} > tail_tol {policy.tail_tol:.3g}"
    )
    if policy.strict:
        raise TruncationError(msg, partial=total, last_increment=last)
    logger.info("%s", msg)
    return total


def _majorant_tail(op: OperatorSpec, policy: TruncationPolicy):
    if not policy.use_majorant or op.m == 0:
        return None
    params, z = _majorant_arguments(op, policy.target_T)
    from fracgreen.special_functions import ml_multivariate_partial_sums

    partials = list(ml_multivariate_partial_sums(params, z))
    total = partials[-1]

    def tail(k):
        # layer k + 1 of the majorant bounds increment k
        idx = min(k + 1, len(partials) - 1)
        return total - partials[idx]

    return tail


def homogeneous_solution(
    op: OperatorSpec, policy: TruncationPolicy | None = None
) -> GeneralizedPowerSeries:
    r"""Solution of :math:`L(D)y = 0` with unit initial data, as a power series.

    The leading term :math:`t^{\alpha_0-1}/\Gamma(\alpha_0)` plus Neumann
    increments until one falls below ``policy.tail_tol`` on
    ``[0, policy.target_T]``.
    """
    policy = policy or TruncationPolicy()
    _require_polynomial(op)
    leading = GeneralizedPowerSeries.monomial(rgamma(op.alpha0), op.alpha0 - 1.0)
    return _sum_increments(leading, homogeneous_increments(op), policy, _majorant_tail(op, policy))


def greens_function(
    op: OperatorSpec, policy: TruncationPolicy | None = None
) -> BivariatePowerSeries:
    r"""Green's function :math:`G(t, \tau)` as a bivariate power series.

    Same construction as :func:`homogeneous_solution` with the origin moved to
    :math:`\tau`; polynomial coefficients are re-expanded about :math:`\tau`.
    """
    policy = policy or TruncationPolicy()
    _require_polynomial(op)
    leading = BivariatePowerSeries(((rgamma(op.alpha0), 0, op.alpha0 - 1.0),))
    return _sum_increments(leading, greens_increments(op), policy, _majorant_tail(op, policy))


def green_section(
    op: OperatorSpec, tau: float, policy: TruncationPolicy | None = None
) -> GeneralizedPowerSeries:
    r"""The section :math:`s \mapsto G(\tau + s, \tau)` with origin ``tau``.

    For fixed ``tau`` this is the unit-data homogeneous solution for the
    coefficients :math:`a_h(\tau + s)`. It is much smaller than the bivariate
    series when small order gaps need many layers. ``policy.target_T`` is
    measured from ``tau``.
    """
    y = homogeneous_solution(op.shifted(tau), policy)
    return GeneralizedPowerSeries(y.terms, origin=float(tau), max_terms=y.max_terms)


def inhomogeneous_solution(
    op: OperatorSpec, rhs: GeneralizedPowerSeries, policy: TruncationPolicy | None = None
) -> GeneralizedPowerSeries:
    r"""Solution of :math:`L(D)y = h` with zero initial data for a power-sum ``h``.

    Sums :math:`y = I^{\alpha_0}\sum_k (-1)^k \mathcal{K}^k h`, which is the
    Green's function convolution carried out term by term.
    """
    policy = policy or TruncationPolicy()
    _require_polynomial(op)
    if rhs.origin != 0.0:
        raise ValueError("right-hand side must be expanded about t = 0")
    leading = rl_integral(rhs, op.alpha0) if rhs else GeneralizedPowerSeries()
    return _sum_increments(leading, inhomogeneous_increments(op, rhs), policy)


def inhomogeneous_increments(
    op: OperatorSpec, rhs: GeneralizedPowerSeries
) -> Iterator[GeneralizedPowerSeries]:
    r"""Terms :math:`(-1)^k I^{\alpha_0}\mathcal{K}^k h` for ``k = 1, 2, ...``.

    The ``k = 0`` term :math:`I^{\alpha_0}h` is not included.
    """
    _require_polynomial(op)
    f = -_apply_kernel(op, rhs)
    while f:
        yield rl_integral(f, op.alpha0)
        f = -_apply_kernel(op, f)


def apply_operator(op: OperatorSpec, y: GeneralizedPowerSeries) -> GeneralizedPowerSeries:
    r""":math:`L(D)y` computed exactly, with derivatives taken from ``y.origin``."""
    _require_polynomial(op)
    out = rl_derivative(y, op.alpha0)
    for c, a in zip(op.coeffs, op.orders[1:]):
        out = out + poly_multiply(rl_derivative(y, a), c)
    return out


# }}}

# {{{ constant coefficients


def _vectorized(func, t):
    if np.isscalar(t):
        return func(float(t))
    t = np.asarray(t, dtype=float)
    return np.array([func(float(x)) for x in t.ravel()]).reshape(t.shape)


def constant_coeff_solution(op: OperatorSpec, t):
    r"""Unit-data homogeneous solution for constant coefficients :math:`a_h = A_h`.

    .. math::

        y(t) = t^{\alpha_0-1} E_{(\alpha_0-\alpha_1,\dots,\alpha_0-\alpha_m),\alpha_0}
            (-A_1 t^{\alpha_0-\alpha_1}, \dots, -A_m t^{\alpha_0-\alpha_m})
    """
    A = op.constants
    gaps = op.gaps

    def one(x):
        if not x > 0:
            raise ValueError(f"t must be positive, got {x}")
        if op.m == 0:
            return x ** (op.alpha0 - 1.0) * rgamma(op.alpha0)
        params = MLParams(gaps, op.alpha0)
        z = [-a * x**g for a, g in zip(A, gaps)]
        return x ** (op.alpha0 - 1.0) * ml_multivariate(params, z)

    return _vectorized(one, t)


def constant_coeff_green(op: OperatorSpec, t, tau):
    r"""Closed-form Green's function :math:`G(t,\tau) = y(t - \tau)` for constant coefficients."""
    if np.isscalar(t) and np.isscalar(tau):
        return constant_coeff_solution(op, t - tau)
    return constant_coeff_solution(op, np.asarray(t, dtype=float) - np.asarray(tau, dtype=float))


def _regrouped_sum(op: OperatorSpec, x: float, second_param_shift: float = 0.0) -> float:
    A = op.constants
    a0 = op.alpha0
    a1 = op.orders[1]
    gap = a0 - a1
    rest = op.orders[2:]
    z1 = -A[0] * x**gap
    layers = []
    small = 0
    for l in range(10_000):
        terms = []
        for beta in compositions(l, op.m - 1):
            weight = 1.0
            for Aj, bj in zip(A[1:], beta):
                weight *= Aj**bj / math.factorial(bj)
            if weight == 0.0:
                continue
            b = a0 + math.fsum((a1 - aj) * bj for aj, bj in zip(rest, beta))
            power = x ** (gap * l + b - 1.0)
            terms.append(
                (-1) ** l * weight * power * ml_two_param_deriv(gap, b + second_param_shift, l, z1)
            )
        layers.append(math.fsum(terms))
        partial = math.fsum(layers)
        if op.m == 1:
            return partial
        mass = math.fsum(abs(v) for v in terms)
        if mass < 1e-16 * (1.0 + abs(partial)):
            small += 1
            if small >= 2:
                return partial
        else:
            small = 0
    raise TruncationError("regrouped Mittag-Leffler sum did not converge")


def constant_coeff_solution_ml(op: OperatorSpec, t):
    r"""Same function as :func:`constant_coeff_solution`, regrouped around :math:`A_1`.

    .. math::

        y(t) = \sum_{l\ge0} (-1)^l \sum_{\beta_2+\dots+\beta_m=l}
            \prod_{i\ge2}\frac{A_i^{\beta_i}}{\beta_i!}\,
            t^{(\alpha_0-\alpha_1)l + b_\beta - 1}\,
            E^{(l)}_{\alpha_0-\alpha_1,\,b_\beta}(-A_1 t^{\alpha_0-\alpha_1}),

    with :math:`b_\beta = \alpha_0 + \sum_{j\ge2}(\alpha_1-\alpha_j)\beta_j`
    and :math:`E^{(l)}` from :func:`~fracgreen.special_functions.ml_two_param_deriv`.
    """
    if op.m < 1:
        raise ValueError("the regrouped form needs at least one coefficient")
    if not op.is_constant:
        raise ValueError("operator coefficients are not constant")

    def one(x):
        if not x > 0:
            raise ValueError(f"t must be positive, got {x}")
        return _regrouped_sum(op, x)

    return _vectorized(one, t)


# }}}

# {{{ majorant


def coefficient_sup(op: OperatorSpec, T: float) -> tuple[float, ...]:
    r""":math:`A_h = \max_{0\le t\le T}|a_h(t)|` for each coefficient.

    Exact (up to root finding) for polynomials; a 2001-point scan otherwise.
    """
    out = []
    for h, c in enumerate(op.coeffs):
        if isinstance(c, np.polynomial.Polynomial):
            cands = [0.0, T]
            if c.degree() >= 2:
                for r in c.deriv().roots():
                    if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and 0 < r.real < T:
                        cands.append(float(r.real))
            out.append(float(np.max(np.abs(c(np.array(cands))))))
        else:
            grid = np.linspace(0.0, T, 2001)
            out.append(float(np.max(np.abs(op.coeff_values(h, grid)))))
    return tuple(out)


def _majorant_arguments(op: OperatorSpec, T: float):
    A = coefficient_sup(op, T)
    return MLParams(op.gaps, 1.0), [a * T**g for a, g in zip(A, op.gaps)]


def majorant_bound(op: OperatorSpec, T: float) -> float:
    r""":math:`E_{(\alpha_0-\alpha_1,\dots),1}(A_1T^{\alpha_0-\alpha_1},\dots,A_mT^{\alpha_0-\alpha_m})`.

    Dominates the :math:`L^1(0,T)` norm of the series for
    :math:`D^{\alpha_0}y`; equals one for the bare operator :math:`D^{\alpha_0}`.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if op.m == 0:
        return 1.0
    params, z = _majorant_arguments(op, T)
    return ml_multivariate(params, z)


# }}}
