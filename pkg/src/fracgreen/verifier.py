r"""Independent checks of candidate solutions and Green's functions.

A solution is checked in two parts:

* the residual :math:`L(D)y - h`, reported as the weighted sup-norm
  :math:`\sup_{t \in [T/10, T]} |r(t)| / t^{\alpha_0-1}`;
* the limits :math:`D^{\alpha_0-j}y(0^+)` for :math:`j = 1, \dots, n_0`.

Power-series candidates are checked exactly: the operator is applied term by
term and each limit is read off as the coefficient of :math:`s^0` after
applying :math:`D^{\alpha_0-j}` (a surviving negative power means the limit
is infinite). Grid candidates go through :mod:`fracgreen.numeric_path`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fracgreen.exceptions import DomainError
from fracgreen.neumann_engine import OperatorSpec, apply_operator
from fracgreen.numeric_path import (
    GradedGrid,
    GridFunction,
    frac_derivative_grid,
    frac_integral_grid,
)
from fracgreen.power_algebra import (
    COEFF_FLOOR,
    EXPONENT_TOL,
    BivariatePowerSeries,
    GeneralizedPowerSeries,
    rl_operator,
)

logger = logging.getLogger(__name__)

__all__ = [
    "IC_TOL_NUMERIC",
    "IC_TOL_SYMBOLIC",
    "RESIDUAL_TOL",
    "VerificationReport",
    "initial_values",
    "significant_lowest_exponent",
    "verify_green",
    "verify_solution",
]

#: weighted residual tolerance on the window ``[T/10, T]``
RESIDUAL_TOL = 1e-3
#: initial-condition tolerance for power-series candidates
IC_TOL_SYMBOLIC = 1e-12
#: initial-condition tolerance for grid candidates
IC_TOL_NUMERIC = 1e-4

#: relative size below which residual terms count as cancellation noise
_ROUNDOFF = 64 * np.finfo(float).eps

#: number of sample points used to take the sup-norm of a series residual
_WINDOW_SAMPLES = 2001


# {{{ report


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of :func:`verify_solution` or :func:`verify_green`."""

    #: weighted sup-norm of the residual on the check window
    residual_norm: float
    #: observed limits of the derivatives of order ``alpha_0 - j``, ``j = 1..n0``
    ic_values: tuple[float, ...]
    #: *True* if both the residual and the initial values are within tolerance
    converged: bool
    #: human-readable summary
    details: str = ""
    #: per-sample reports (one per ``tau`` for Green's functions)
    parts: tuple[VerificationReport, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.residual_norm >= 0:
            raise ValueError(f"residual norm must be nonnegative: {self.residual_norm}")

    def __bool__(self) -> bool:
        return self.converged

    def render(self) -> str:
        """Structured plain-text form (used by the command line)."""
        lines = [
            f"status: {'PASS' if self.converged else 'FAIL'}",
            f"residual_norm: {self.residual_norm:.17g}",
        ]
        lines += [f"ic[{j}]: {v:.17g}" for j, v in enumerate(self.ic_values, start=1)]
        if self.details:
            lines += [f"# {line}" for line in self.details.splitlines()]
        return "\n".join(lines)


def _target_ic(n0: int, target) -> np.ndarray:
    if target == "unit":
        return np.eye(1, n0)[0]
    if target == "zero":
        return np.zeros(n0)
    out = np.asarray(target, dtype=float)
    if out.shape != (n0,):
        raise ValueError(f"expected {n0} initial values, got {out.shape}")
    return out


def _ic_error(ic: Sequence[float], target: np.ndarray) -> float:
    diff = np.abs(np.asarray(ic, dtype=float) - target)
    diff[np.isnan(diff)] = np.inf
    return float(np.max(diff / np.maximum(1.0, np.abs(target)), initial=0.0))


# }}}

# {{{ symbolic checks


def _series_limit(series: GeneralizedPowerSeries) -> float:
    """Limit of a power series as ``s -> 0+``."""
    value = 0.0
    for c, mu in series.terms:
        if abs(c) <= COEFF_FLOOR:
            continue
        if mu < -EXPONENT_TOL:
            return math.copysign(math.inf, c)
        if abs(mu) <= EXPONENT_TOL:
            value += c
    return value


def initial_values(op: OperatorSpec, y: GeneralizedPowerSeries) -> tuple[float, ...]:
    r"""Exact limits :math:`D^{\alpha_0-j}y(a^+)`, ``j = 1..n0``, at the series origin."""
    out = []
    for j in range(1, op.n0 + 1):
        try:
            out.append(_series_limit(rl_operator(y, op.alpha0 - j)))
        except DomainError:
            out.append(math.inf)
    return tuple(out)


def significant_lowest_exponent(
    residual: GeneralizedPowerSeries, y: GeneralizedPowerSeries, horizon: float
) -> float:
    """Lowest exponent of *residual* ignoring terms at round-off level.

    A term counts if its bound ``|c| (H - a)^mu`` (``a`` the series origin) exceeds ``64 eps``
    times the corresponding bound of the candidate *y*. Returns ``inf`` for a zero
    residual.
    """
    floor = _ROUNDOFF * max(y.abs_bound(horizon), 1.0) if y else 0.0
    length = horizon - residual.origin
    for c, mu in residual.terms:
        if abs(c) * length**mu > floor:
            return float(mu)
    return math.inf


def _window(lo: float, hi: float, grid: GradedGrid | None) -> np.ndarray:
    if grid is not None:
        return grid.nodes[grid.window(lo, hi)]
    return np.linspace(lo, hi, _WINDOW_SAMPLES)


def _h_values(h, t: np.ndarray) -> np.ndarray:
    if h is None:
        return np.zeros_like(t)
    if isinstance(h, GridFunction):
        return h(t)
    if callable(h):
        return np.broadcast_to(np.asarray(h(t), dtype=float), t.shape)
    return np.full_like(t, float(h))


def _symbolic_residual(op, y, h, s: np.ndarray) -> tuple[float, float]:
    """Weighted residual norm and the lowest exponent of the residual series."""
    try:
        res = apply_operator(op, y)
    except DomainError as exc:
        logger.info("operator not applicable to candidate: %s", exc)
        return math.inf, -math.inf
    if isinstance(h, GeneralizedPowerSeries):
        res = res - GeneralizedPowerSeries(h.terms, origin=res.origin)
        values = res(y.origin + s) if res else np.zeros_like(s)
    else:
        values = (res(y.origin + s) if res else 0.0) - _h_values(h, y.origin + s)
    weight = s ** (op.alpha0 - 1.0)
    norm = float(np.max(np.abs(values) / weight))
    return norm, significant_lowest_exponent(res, y, y.origin + float(s[-1]))


# }}}

# {{{ numeric checks


def _numeric_operator(op: OperatorSpec, y: GridFunction, leading_exponent) -> np.ndarray:
    t = y.grid.nodes
    out = frac_derivative_grid(y, op.alpha0, leading_exponent).values
    for h, a in enumerate(op.orders[1:]):
        out = out + op.coeff_values(h, t) * frac_derivative_grid(y, a, leading_exponent).values
    return out


def _numeric_initial_values(op: OperatorSpec, y: GridFunction, leading_exponent):
    t = y.grid.nodes
    out = []
    for j in range(1, op.n0 + 1):
        order = op.alpha0 - j
        if order >= 0:
            z = frac_derivative_grid(y, order, leading_exponent).values
        else:
            z = frac_integral_grid(y, -order, leading_exponent).values
        out.append(_extrapolate_origin(t, z))
    return tuple(out)


def _extrapolate_origin(t: np.ndarray, z: np.ndarray) -> float:
    """Limit at ``0+`` of samples behaving like ``z0 + c t^gamma``, ``gamma > 0``.

    Nodes ``t_1, t_4, t_16`` are in geometric ratio on a graded grid, so
    Aitken's delta-squared process recovers ``z0`` for any ``gamma``. When
    the increments are at round-off level or not monotone this falls back to
    linear extrapolation from the first two nodes.
    """
    linear = float(z[0] - (z[1] - z[0]) * t[0] / (t[1] - t[0]))
    if z.size < 16:
        return linear
    z1, z2, z3 = z[0], z[3], z[15]
    d1, d2 = z2 - z1, z3 - z2
    floor = _ROUNDOFF * max(abs(z1), abs(z3), 1.0)
    if abs(d1) <= floor or d1 * d2 <= 0 or abs(d2) <= abs(d1):
        return linear
    return float(z1 - d1 * d1 / (d2 - d1))


# }}}

# {{{ public checks


def verify_solution(
    op: OperatorSpec,
    y,
    h=None,
    grid: GradedGrid | None = None,
    *,
    T: float | None = None,
    initial: str | Sequence[float] = "auto",
    leading_exponent: float | None = None,
    residual_tol: float = RESIDUAL_TOL,
    ic_tol: float | None = None,
) -> VerificationReport:
    r"""Check that *y* solves :math:`L(D)y = h` with the requested initial data.

    :arg y: a :class:`~fracgreen.power_algebra.GeneralizedPowerSeries`
        (checked exactly) or a :class:`~fracgreen.numeric_path.GridFunction`.
    :arg h: right-hand side: *None* for zero, a power series, a callable or a
        grid function.
    :arg grid: sample nodes for series residuals; ignored for grid candidates.
    :arg T: horizon (defaults to the grid horizon, or 1).
    :arg initial: expected limits: ``"unit"``, ``"zero"``, a sequence of
        ``n0`` values or ``"auto"`` (unit data when *h* is zero, zero data
        otherwise).
    :arg leading_exponent: declared leading power of a grid candidate near
        the origin (fitted from the data if not given).
    """
    if isinstance(y, GridFunction):
        grid = y.grid
    if T is None:
        T = grid.T if grid is not None else 1.0
    if initial == "auto":
        is_zero = h is None or (isinstance(h, GeneralizedPowerSeries) and not h)
        initial = "unit" if is_zero else "zero"
    target = _target_ic(op.n0, initial)

    if isinstance(y, GeneralizedPowerSeries):
        ic_tol = IC_TOL_SYMBOLIC if ic_tol is None else ic_tol
        s = _window(T / 10.0, T, grid)
        norm, lowest = _symbolic_residual(op, y, h, s)
        ic = initial_values(op, y)
        details = f"symbolic check, residual lowest exponent {lowest:.17g}"
    elif isinstance(y, GridFunction):
        ic_tol = IC_TOL_NUMERIC if ic_tol is None else ic_tol
        mask = grid.window(T / 10.0, T)
        t = grid.nodes[mask]
        res = _numeric_operator(op, y, leading_exponent)[mask] - _h_values(h, t)
        norm = float(np.max(np.abs(res) / t ** (op.alpha0 - 1.0)))
        ic = _numeric_initial_values(op, y, leading_exponent)
        details = f"numeric check on {mask.sum()} nodes of a graded grid (N={grid.N})"
    else:
        raise TypeError(f"cannot verify a candidate of type {type(y).__name__}")

    if not math.isfinite(norm):
        norm = math.inf
    ic_err = _ic_error(ic, target)
    ok = norm <= residual_tol and ic_err <= ic_tol
    details += (
        f"\nresidual {norm:.3g} (tol {residual_tol:.3g}),"
        f" initial-value error {ic_err:.3g} (tol {ic_tol:.3g})"
    )
    return VerificationReport(norm, tuple(float(v) for v in ic), ok, details)


def verify_green(
    op: OperatorSpec,
    G,
    tau_samples: Sequence[float],
    horizon: float = 1.0,
    *,
    residual_tol: float = RESIDUAL_TOL,
    ic_tol: float = IC_TOL_SYMBOLIC,
) -> VerificationReport:
    r"""Check the defining properties of a Green's function at several ``tau``.

    For each ``tau`` the section :math:`s \mapsto G(\tau + s, \tau)` must solve
    :math:`L(D_{\tau+})G = 0` (residual measured for
    :math:`s \in [H/10, H]`, :math:`H` = *horizon*) with
    :math:`D^{\alpha_0-j}G(\tau^+) = \delta_{j1}`.

    :arg G: a :class:`~fracgreen.power_algebra.BivariatePowerSeries`, or a
        callable ``tau -> GeneralizedPowerSeries`` with origin ``tau``.
    """
    if not tau_samples:
        raise ValueError("at least one tau sample is required")
    target = _target_ic(op.n0, "unit")
    s = np.linspace(horizon / 10.0, horizon, _WINDOW_SAMPLES)
    parts = []
    for tau in tau_samples:
        tau = float(tau)
        if isinstance(G, BivariatePowerSeries):
            section = G.at_tau(tau)
        else:
            section = G(tau)
        norm, lowest = _symbolic_residual(op, section, None, s)
        ic = initial_values(op, section)
        ic_err = _ic_error(ic, target)
        ok = norm <= residual_tol and ic_err <= ic_tol
        parts.append(
            VerificationReport(
                norm,
                ic,
                ok,
                f"tau={tau:.17g}: residual {norm:.3g}, lowest exponent {lowest:.6g},"
                f" initial-value error {ic_err:.3g}",
            )
        )
    worst = max(parts, key=lambda p: (not p.converged, p.residual_norm))
    return VerificationReport(
        max(p.residual_norm for p in parts),
        worst.ic_values,
        all(p.converged for p in parts),
        "\n".join(p.details for p in parts),
        tuple(parts),
    )


# }}}
