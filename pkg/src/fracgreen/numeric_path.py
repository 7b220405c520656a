r"""Grid solvers for coefficients the symbolic algebra cannot handle.

Functions live on a graded grid :math:`t_i = T (i/N)^r`, :math:`i = 1..N`,
which clusters nodes near the origin where solutions behave like powers of
:math:`t`. Fractional integrals use product integration: the kernel
:math:`(t_i-\tau)^{\alpha-1}` is integrated exactly against the piecewise
linear interpolant of the data.

Near :math:`t = 0` linear interpolation of a power singularity is poor, so
every integral first splits off a power law fitted to the first two nodes,
integrates it with the power rule and only hands the (much smoother)
remainder to the quadrature. On the first cell the data is therefore the
fitted power law itself.

The successive approximation iterates in the unknown
:math:`F = D^{\alpha_0} y`,

.. math::

    F_{l+1} = -\sum_h a_h \left(\frac{t^{\alpha_0-\alpha_h-1}}{\Gamma(\alpha_0-\alpha_h)}
        + I^{\alpha_0-\alpha_h} F_l\right),
    \qquad
    y = \frac{t^{\alpha_0-1}}{\Gamma(\alpha_0)} + I^{\alpha_0} F,

so grid iterates are never differentiated.
"""

from __future__ import annotations

import functools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracgreen.exceptions import ConvergenceError
from fracgreen.neumann_engine import OperatorSpec
from fracgreen.power_algebra import (
    BivariatePowerSeries,
    GeneralizedPowerSeries,
    is_annihilated,
)
from fracgreen.special_functions import gamma, gamma_ratio, rgamma

logger = logging.getLogger(__name__)

__all__ = [
    "GradedGrid",
    "GridFunction",
    "convolve_green",
    "convolve_green_series",
    "default_grading",
    "frac_derivative_grid",
    "frac_integral_grid",
    "green_on_grid",
    "solve_inhomogeneous_grid",
    "successive_approximation",
]

#: remainders below this multiple of eps * max|f| are treated as round-off
_ROUNDOFF_FLOOR = 64 * np.finfo(float).eps


# {{{ grids


def default_grading(alpha0: float) -> float:
    r"""``max(2, 1/(alpha0 - floor(alpha0)))``, capped at 4."""
    frac = alpha0 - math.floor(alpha0)
    if frac == 0.0:
        return 4.0
    return min(4.0, max(2.0, 1.0 / frac))


@dataclass(frozen=True)
class GradedGrid:
    """Nodes ``T * (i / N)**r`` for ``i = 1..N``; no node at the origin."""

    T: float
    N: int = 2048
    r: float = 2.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.N < 3:
            raise ValueError(f"at least 3 nodes are needed, got {self.N}")
        if not self.r >= 1:
            raise ValueError(f"grading exponent must be >= 1, got {self.r}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "r", float(self.r))

    @functools.cached_property
    def nodes(self) -> np.ndarray:
        t = self.T * (np.arange(1, self.N + 1) / self.N) ** self.r
        t[-1] = self.T
        t.flags.writeable = False
        return t

    @property
    def nodes_with_origin(self) -> np.ndarray:
        return np.concatenate([[0.0], self.nodes])

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.nodes_with_origin)))

    def window(self, lo: float, hi: float | None = None) -> np.ndarray:
        """Boolean mask of the nodes in ``[lo, hi]``."""
        hi = self.T if hi is None else hi
        t = self.nodes
        return (t >= lo * (1 - 1e-14)) & (t <= hi * (1 + 1e-14))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the nodes of a :class:`GradedGrid`."""

    grid: GradedGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GradedGrid, func) -> GridFunction:
        if isinstance(func, GeneralizedPowerSeries):
            return cls(grid, func(grid.nodes))
        return cls(grid, np.broadcast_to(np.asarray(func(grid.nodes), dtype=float), (grid.N,)))

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, x):
        """Linear interpolation between nodes (constant below the first node)."""
        return np.interp(x, self.grid.nodes, self.values)

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _values(other, self.grid))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _values(other, self.grid))

    def to_csv(self, file) -> None:
        """Write ``t,value`` rows with 17 significant digits."""
        close = False
        if isinstance(file, str):
            file = open(file, "w")  # noqa: SIM115
            close = True
        try:
            file.write("t,value\n")
            for t, v in zip(self.t, self.values):
                file.write(f"{t:.17g},{v:.17g}\n")
        finally:
            if close:
                file.close()


def _values(f, grid: GradedGrid) -> np.ndarray:
    if isinstance(f, GridFunction):
        if f.grid != grid:
            raise ValueError("grid functions live on different grids")
        return f.values
    if isinstance(f, GeneralizedPowerSeries):
        return f(grid.nodes)
    if callable(f):
        return np.broadcast_to(np.asarray(f(grid.nodes), dtype=float), (grid.N,)).copy()
    return np.broadcast_to(np.asarray(f, dtype=float), (grid.N,)).copy()


# }}}

# {{{ product integration


def _weights_block(t: np.ndarray, targets: np.ndarray, alpha: float) -> np.ndarray:
    # rows: targets t_i (a subset of t[1:]); columns: nodes t_0 = 0 .. t_N
    a = targets[:, None] - t[None, :-1]  # t_i - t_{j-1}
    b = targets[:, None] - t[None, 1:]  # t_i - t_j
    valid = b >= 0
    a = np.where(valid, a, 0.0)
    b = np.where(valid, b, 0.0)
    h = np.diff(t)[None, :]
    A0 = (a**alpha - b**alpha) / alpha
    A1 = (a ** (alpha + 1) - b ** (alpha + 1)) / (alpha + 1)
    left = np.where(valid, (A1 - b * A0) / h, 0.0)
    right = np.where(valid, (a * A0 - A1) / h, 0.0)
    w = np.zeros((targets.size, t.size))
    w[:, :-1] += left
    w[:, 1:] += right
    return w * rgamma(alpha)


@functools.lru_cache(maxsize=6)
def _weights(grid: GradedGrid, alpha: float) -> np.ndarray:
    t = grid.nodes_with_origin
    out = np.empty((grid.N, grid.N + 1))
    block = 256
    for start in range(0, grid.N, block):
        stop = min(start + block, grid.N)
        out[start:stop] = _weights_block(t, t[start + 1 : stop + 1], alpha)
    out.flags.writeable = False
    return out


def _fit_power(t: np.ndarray, v: np.ndarray, exponent: float | None):
    """Power-law terms matching ``v`` at the first two nodes.

    Returns a list of ``(coeff, exponent)``; empty when no useful fit exists.
    """
    t1, t2 = t[0], t[1]
    f1, f2 = v[0], v[1]
    if exponent is not None:
        if exponent == 0.0:
            return []
        p1, p2 = t1**exponent, t2**exponent
        c = (f2 - f1) / (p2 - p1)
        return [(c, exponent), (f1 - c * p1, 0.0)]
    if f1 == 0.0 or f2 == 0.0 or (f1 > 0) != (f2 > 0):
        return []
    mu = math.log(f2 / f1) / math.log(t2 / t1)
    if not (-1.0 < mu < 1.0):
        return []
    return [(f1 / t1**mu, mu)]


def _split(grid: GradedGrid, values: np.ndarray, exponent: float | None):
    """Split grid data into fitted power terms and a remainder with ``r(0)``."""
    t = grid.nodes
    terms = _fit_power(t, values, exponent)
    if terms:
        rem = values - sum(c * t**mu for c, mu in terms)
        rem[:2] = 0.0
        return terms, rem, 0.0
    # no singular part: extrapolate linearly to the origin
    f0 = values[0] - (values[1] - values[0]) * t[0] / (t[1] - t[0])
    return [], values.copy(), f0


def _integrate_remainder(grid: GradedGrid, rem: np.ndarray, r0: float, alpha: float):
    if alpha == 1.0:
        # trapezoid rule is the exact product integration for a unit kernel
        t = grid.nodes_with_origin
        v = np.concatenate([[r0], rem])
        return np.cumsum(0.5 * np.diff(t) * (v[1:] + v[:-1]))
    return _weights(grid, float(alpha)) @ np.concatenate([[r0], rem])


def _power_integral(terms, t: np.ndarray, alpha: float) -> np.ndarray:
    out = np.zeros_like(t)
    for c, mu in terms:
        out += c * gamma_ratio(mu + 1.0, mu + 1.0 + alpha) * t ** (mu + alpha)
    return out


def frac_integral_grid(f, alpha: float, leading_exponent: float | None = None) -> GridFunction:
    r"""Riemann-Liouville integral :math:`I^\alpha f` at every grid node.

    Product integration on piecewise-linear data after removing a power law
    fitted at the first two nodes. With *leading_exponent* :math:`\sigma`
    declared, the fitted part is :math:`c t^\sigma + d`; otherwise it is
    :math:`c t^\mu` with :math:`\mu` estimated from the data.
    """
    if not alpha > 0:
        raise ValueError(f"integration order must be positive, got {alpha}")
    grid = f.grid
    terms, rem, r0 = _split(grid, f.values, leading_exponent)
    out = _integrate_remainder(grid, rem, r0, alpha)
    return GridFunction(grid, out + _power_integral(terms, grid.nodes, alpha))


def _nth_derivative(t: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    # interpolatory weights on an (n + 2)-point stencil around every node:
    # second order everywhere, including the one-sided stencils at the ends
    # (repeated np.gradient loses an order at the boundary for n >= 2)
    if n == 0:
        return v
    k = n + 2
    i = np.arange(t.size)
    start = np.clip(i - k // 2, 0, t.size - k)
    idx = start[:, None] + np.arange(k)[None, :]
    scale = np.maximum(t[np.minimum(i + 1, t.size - 1)] - t[np.maximum(i - 1, 0)], 1e-300)
    x = (t[idx] - t[:, None]) / scale[:, None]
    # solve sum_j w_j x_j^p = n! delta_{pn} for p = 0..k-1
    V = x[:, None, :] ** np.arange(k)[None, :, None]
    rhs = np.zeros((t.size, k))
    rhs[:, n] = math.factorial(n)
    w = np.linalg.solve(V, rhs[..., None])[..., 0]
    return np.sum(w * v[idx], axis=1) / scale**n


def frac_derivative_grid(
    f, alpha: float, leading_exponent: float | None = None
) -> GridFunction:
    r"""Riemann-Liouville derivative :math:`D^\alpha f = D^n I^{n-\alpha} f`.

    The leading power law (declared or fitted) is differentiated exactly,
    including the annihilation of :math:`t^{\alpha-j}`; the remainder is
    integrated by product integration and differenced ``n`` times with
    second-order nonuniform finite differences. Orders above 2 work but
    lose accuracy quickly (a warning is issued).
    """
    if alpha < 0:
        raise ValueError(f"differentiation order must be nonnegative, got {alpha}")
    grid = f.grid
    if alpha == 0:
        return GridFunction(grid, f.values.copy())
    n = math.ceil(alpha)
    if n >= 3:
        warnings.warn(
            f"numeric D^{alpha} needs {n} finite-difference passes; expect poor accuracy",
            stacklevel=2,
        )
    terms, rem, r0 = _split(grid, f.values, leading_exponent)
    scale = np.max(np.abs(f.values))
    if np.max(np.abs(rem), initial=0.0) <= _ROUNDOFF_FLOOR * scale:
        rem = np.zeros_like(rem)
        r0 = 0.0
    t = grid.nodes_with_origin
    if n - alpha > 0:
        q = np.concatenate([[0.0], _integrate_remainder(grid, rem, r0, n - alpha)])
    else:
        q = np.concatenate([[r0], rem])
    out = _nth_derivative(t, q, n)[1:]
    for c, mu in terms:
        if is_annihilated(mu, alpha):
            continue
        out = out + c * gamma(mu + 1.0) * rgamma(mu + 1.0 - alpha) * grid.nodes ** (mu - alpha)
    return GridFunction(grid, out)


# }}}

# {{{ successive approximation


def _iterate(grid, op: OperatorSpec, forcing: np.ndarray, max_iter: int, tol: float, history):
    t = grid.nodes
    a = [op.coeff_values(h, t) for h in range(op.m)]
    F = forcing.copy()
    for it in range(max_iter):
        new = forcing.copy()
        if op.m and np.any(F):
            Fg = GridFunction(grid, F)
            for ah, gap in zip(a, op.gaps):
                new -= ah * frac_integral_grid(Fg, gap).values
        change = float(np.max(np.abs(new - F)))
        F = new
        if history is not None:
            history.append(change)
        if change < tol * (1.0 + float(np.max(np.abs(F)))):
            logger.debug("successive approximation converged in %d iterations", it + 1)
            return F
    raise ConvergenceError(
        f"successive approximation did not converge in {max_iter} iterations "
        f"(last change {change:.3g})"
    )


def successive_approximation(
    op: OperatorSpec,
    grid: GradedGrid,
    max_iter: int = 200,
    tol: float = 1e-13,
    history: list | None = None,
) -> GridFunction:
    r"""Homogeneous solution with unit initial data on a grid.

    Iterates in :math:`F = D^{\alpha_0} y` starting from :math:`F_0 = 0` and
    returns :math:`y = t^{\alpha_0-1}/\Gamma(\alpha_0) + I^{\alpha_0}F`. The
    max-norm change of each iterate is appended to *history* if given.
    """
    t = grid.nodes
    forcing = np.zeros_like(t)
    for h, gap in enumerate(op.gaps):
        forcing -= op.coeff_values(h, t) * t ** (gap - 1.0) * rgamma(gap)
    # F_1 is the forcing itself; count the zero start as one iteration
    if history is not None:
        history.append(float(np.max(np.abs(forcing))))
    F = _iterate(grid, op, forcing, max(max_iter - 1, 1), tol, history) if op.m else forcing
    y = t ** (op.alpha0 - 1.0) * rgamma(op.alpha0)
    if np.any(F):
        y = y + frac_integral_grid(GridFunction(grid, F), op.alpha0).values
    return GridFunction(grid, y)


def solve_inhomogeneous_grid(
    op: OperatorSpec,
    rhs,
    grid: GradedGrid,
    max_iter: int = 200,
    tol: float = 1e-13,
    rhs_exponent: float | None = None,
    history: list | None = None,
) -> GridFunction:
    r"""Solution of :math:`L(D)y = h` with zero initial data on a grid.

    Solves :math:`F + \sum_h a_h I^{\alpha_0-\alpha_h}F = h` by fixed-point
    iteration and returns :math:`y = I^{\alpha_0}F`. *rhs* may be a callable,
    a :class:`GridFunction` or a power series; *rhs_exponent* declares a
    singular behaviour :math:`h \sim c\,t^\sigma` near the origin.
    """
    h = _values(rhs, grid)
    F = _iterate(grid, op, h, max_iter, tol, history) if op.m else h
    if not np.any(F):
        return GridFunction(grid, np.zeros(grid.N))
    exponent = rhs_exponent if np.array_equal(F, h) else None
    return frac_integral_grid(GridFunction(grid, F), op.alpha0, exponent)


def green_on_grid(op: OperatorSpec, tau: float, grid: GradedGrid, **kwargs) -> GridFunction:
    r"""Numeric Green's function :math:`G(\tau + s, \tau)` on a grid in ``s``.

    The homogeneous problem with coefficients shifted to origin ``tau``.
    """
    return successive_approximation(op.shifted(tau), grid, **kwargs)


# }}}

# {{{ Green's function convolution


def _convolve_series(G: BivariatePowerSeries, hv: np.ndarray, grid: GradedGrid, h_exponent):
    # int_0^t c tau^nu (t - tau)^mu h(tau) dtau = c Gamma(mu + 1) I^(mu + 1)[tau^nu h](t)
    # grouped by the fractional part of mu + 1 and nested with I^1 (Horner)
    t = grid.nodes
    classes: dict[float, dict[int, np.ndarray]] = {}
    low_nu: dict[tuple[float, int], int] = {}
    for term in G.terms:
        order = term.s_exp + 1.0
        k = math.ceil(order - 1e-9) - 1
        base = order - k
        key = next((b for b in classes if abs(b - base) <= 1e-9), base)
        group = classes.setdefault(key, {})
        phi = term.coeff * gamma(order) * t**term.tau_exp * hv
        group[k] = group.get(k, 0.0) + phi
        low_nu[key, k] = min(low_nu.get((key, k), term.tau_exp), term.tau_exp)
    out = np.zeros_like(t)
    for base, group in classes.items():
        acc = None
        for k in range(max(group), -1, -1):
            if k in group:
                exponent = None if h_exponent is None else h_exponent + low_nu[base, k]
                if acc is None:
                    acc = frac_integral_grid(GridFunction(grid, group[k]), 1.0, exponent).values
                    if k == 0:
                        acc = None
                        cur = GridFunction(grid, group[k])
                        break
                    continue
                cur_vals = group[k] + acc
            else:
                cur_vals = acc
            if k == 0:
                cur = GridFunction(grid, cur_vals)
                break
            acc = frac_integral_grid(GridFunction(grid, cur_vals), 1.0).values
        else:  # pragma: no cover - loop always reaches k == 0
            raise AssertionError
        out += frac_integral_grid(cur, base, h_exponent if max(group) == 0 else None).values
    return out


def _convolve_callable(G: Callable, kernel_exponent: float, hv, grid: GradedGrid, h_exponent):
    t = grid.nodes
    N = grid.N
    ti = t[:, None]
    tj = t[None, :]
    s = np.where(tj < ti, ti - tj, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        Gs = np.where(tj < ti, np.asarray(G(ti, tj), dtype=float) / s**kernel_exponent, 0.0)
    # value on the diagonal by linear extrapolation along each row
    idx = np.arange(2, N)
    Gs[idx, idx] = 2.0 * Gs[idx, idx - 1] - Gs[idx, idx - 2]
    Gs[1, 1] = Gs[1, 0]
    Gs[0, 0] = Gs[1, 0] if N > 1 else 0.0
    P = Gs * hv[None, :]
    W = _weights(grid, kernel_exponent + 1.0)
    out = np.empty(N)
    norm = gamma(kernel_exponent + 1.0)
    for i in range(N):
        row = P[i, : i + 1]
        if i >= 1:
            terms = _fit_power(t[:2], row[:2], h_exponent)
        else:
            terms = []
        if terms:
            rem = row - sum(c * t[: i + 1] ** mu for c, mu in terms)
            rem[:2] = 0.0
            r0 = 0.0
        else:
            rem = row
            r0 = row[0] if i == 0 else row[0] - (row[1] - row[0]) * t[0] / (t[1] - t[0])
        acc = W[i, 1 : i + 2] @ rem + W[i, 0] * r0
        for c, mu in terms:
            acc += (
                c
                * rgamma(kernel_exponent + 1.0)
                * math.exp(
                    math.lgamma(mu + 1.0) + math.lgamma(kernel_exponent + 1.0)
                    - math.lgamma(mu + kernel_exponent + 2.0)
                )
                * t[i] ** (mu + kernel_exponent + 1.0)
            )
        out[i] = norm * acc
    return out


def convolve_green(
    G,
    h,
    grid: GradedGrid,
    h_exponent: float | None = None,
    kernel_exponent: float | None = None,
) -> GridFunction:
    r""":math:`y(t_i) = \int_0^{t_i} G(t_i, \tau) h(\tau)\,d\tau` at every node.

    *G* is a :class:`~fracgreen.power_algebra.BivariatePowerSeries` (each term
    reduces exactly to a fractional integral of :math:`\tau^\nu h`) or a
    callable ``G(t, tau)`` behaving like :math:`(t-\tau)^\kappa` times a
    smooth factor, with :math:`\kappa` given as *kernel_exponent*. *h* may be
    a callable, a :class:`GridFunction` or a power series; *h_exponent*
    declares :math:`h \sim c\,\tau^\sigma` near the origin.
    """
    hv = _values(h, grid)
    if not np.any(hv):
        return GridFunction(grid, np.zeros(grid.N))
    if isinstance(G, BivariatePowerSeries):
        return GridFunction(grid, _convolve_series(G, hv, grid, h_exponent))
    if kernel_exponent is None:
        raise ValueError("a callable Green's function needs its kernel_exponent")
    return GridFunction(grid, _convolve_callable(G, kernel_exponent, hv, grid, h_exponent))


def convolve_green_series(
    G: BivariatePowerSeries, h: GeneralizedPowerSeries
) -> GeneralizedPowerSeries:
    r"""Exact convolution of a bivariate Green's series with a power sum.

    Uses :math:`\int_0^t \tau^{\nu+\sigma}(t-\tau)^\mu d\tau =
    B(\nu+\sigma+1, \mu+1)\, t^{\nu+\sigma+\mu+1}`.
    """
    if h.origin != 0.0:
        raise ValueError("right-hand side must be expanded about t = 0")
    out = []
    for g in G.terms:
        for p in h.terms:
            x = g.tau_exp + p.exponent + 1.0
            y = g.s_exp + 1.0
            beta = gamma(y) * gamma_ratio(x, x + y)
            out.append((g.coeff * p.coeff * beta, x + y - 1.0))
    return GeneralizedPowerSeries(out)


# }}}
