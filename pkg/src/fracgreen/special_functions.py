r"""Gamma and Mittag-Leffler type functions on the real line.

Everything here is a pure function of its arguments. The Gamma function uses
a Lanczos approximation (:math:`g = 7`, nine coefficients) on :math:`[1/2, 2)`,
upward recurrence above and reflection below; ratios of Gamma values are formed in log space so
that arguments up to :math:`10^4` do not overflow.

The Mittag-Leffler functions are evaluated by their defining power series,
which is adequate for the moderate arguments (:math:`|z| \lesssim 10`) used by
the solvers.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterator, Sequence

from fracgreen.exceptions import ConvergenceError, PoleError

__all__ = [
    "MLParams",
    "compositions",
    "gamma",
    "gamma_ratio",
    "log_abs_gamma",
    "ml_multivariate",
    "ml_multivariate_partial_sums",
    "ml_two_param",
    "ml_two_param_deriv",
    "rgamma",
]

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

#: largest argument for which Gamma is finite in double precision
_GAMMA_MAX = 171.6243769563027
#: largest argument of math.exp that does not overflow
_LOG_MAX = math.log(sys.float_info.max)

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 100_000
LAYER_MAX = 10_000


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    # sin(pi x) with exact argument reduction, so zeros land on integers
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _lanczos_sum(z: float) -> float:
    # A(z) for Gamma(z + 1) = sqrt(2 pi) t^(z + 1/2) e^(-t) A(z), t = z + g + 1/2
    acc = _LANCZOS_COEFFS[0]
    for k in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[k] / (z + k)
    return acc


def gamma(x: float) -> float:
    """Gamma function of a real argument.

    Integer arguments return the correctly rounded factorial. Raises
    :class:`PoleError` at the nonpositive integers; returns ``inf`` on
    overflow (``x`` above roughly 171.6).
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x == math.floor(x) and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    if x > _GAMMA_MAX:
        return math.inf
    if x >= 2.0:
        # upward recurrence from [1, 2): rounding error grows like sqrt(n)
        # instead of the n * eps of a large power in the Lanczos form
        n = int(math.floor(x)) - 1
        r = x - n
        prod = 1.0
        for k in range(n):
            prod *= r + k
        return prod * gamma(r)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * math.pow(t, z + 0.5) * math.exp(-t) * _lanczos_sum(z)


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, equal to zero at the poles of Gamma."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    if x > _GAMMA_MAX:
        sign, lg = log_abs_gamma(x)
        return math.exp(-lg)
    return 1.0 / gamma(x)


def _lgamma_pos(x: float) -> float:
    # log Gamma(x) for x >= 0.5
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def log_abs_gamma(x: float) -> tuple[float, float]:
    """Return ``(sign, log|Gamma(x)|)``."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x >= 0.5:
        return 1.0, _lgamma_pos(x)
    s = _sinpi(x)
    sign = 1.0 if s > 0 else -1.0
    return sign, math.log(math.pi) - math.log(abs(s)) - _lgamma_pos(1.0 - x)


def _lgamma_pos_diff(x: float, y: float) -> float:
    # log Gamma(x) - log Gamma(y) for x, y >= 0.5 without cancelling the large
    # (x - 1/2) log t parts against each other
    ty = y + _LANCZOS_G - 0.5
    d = x - y
    power = d * math.log(ty) + (x - 0.5) * math.log1p(d / ty)
    return power - d + math.log(_lanczos_sum(x - 1.0) / _lanczos_sum(y - 1.0))


def _reflect(x: float) -> tuple[float, float, float]:
    """Write Gamma(x) = sign * exp(extra) * Gamma(xp) with xp >= 0.5."""
    if x >= 0.5:
        return 1.0, 0.0, x
    s = _sinpi(x)
    return (1.0 if s > 0 else -1.0), math.log(math.pi) - math.log(abs(s)), 1.0 - x


def gamma_ratio(num: float, den: float) -> float:
    """``Gamma(num) / Gamma(den)``, stable for arguments up to ``1e4``."""
    num = float(num)
    den = float(den)
    if _is_pole(num):
        raise PoleError(f"Gamma has a pole at {num}")
    if _is_pole(den):
        raise PoleError(f"Gamma has a pole at {den}")
    if num == den:
        return 1.0
    if abs(num) <= 170.0 and abs(den) <= 170.0:
        gn = gamma(num)
        gd = gamma(den)
        if math.isfinite(gn) and math.isfinite(gd) and gn != 0.0 and gd != 0.0:
            return gn / gd
    sn, en, xn = _reflect(num)
    sd, ed, xd = _reflect(den)
    # a reflected argument turns Gamma(x) into 1/Gamma(1 - x)
    if num < 0.5 and den < 0.5:
        log_mag = en - ed - _lgamma_pos_diff(xn, xd)
    elif num < 0.5:
        log_mag = en - _lgamma_pos(xn) - _lgamma_pos(xd)
    elif den < 0.5:
        log_mag = _lgamma_pos(xn) + _lgamma_pos(xd) - ed
    else:
        log_mag = _lgamma_pos_diff(xn, xd)
    return sn * sd * math.exp(log_mag)


def _power_over_gamma(log_prefactor: float, sign: float, x: float) -> float:
    """``sign * exp(log_prefactor) / Gamma(x)``, through logs."""
    if _is_pole(x):
        return 0.0
    gs, lg = log_abs_gamma(x)
    if log_prefactor - lg > _LOG_MAX:
        return math.copysign(math.inf, sign * gs)
    return sign * gs * math.exp(log_prefactor - lg)


def _ml_term(z: float, i: int, rising: int, x: float) -> float:
    # rising * z**i / Gamma(x), with a log-space fallback when a factor overflows
    if _is_pole(x):
        return 0.0
    if x <= 170.0 and rising < 1e300:
        try:
            p = math.pow(z, i)
        except OverflowError:
            p = math.inf
        if math.isfinite(p):
            return float(rising) * p * rgamma(x)
    if z == 0.0:
        return 0.0
    sign = -1.0 if (z < 0 and i % 2) else 1.0
    log_pre = math.log(rising) + i * math.log(abs(z))
    return _power_over_gamma(log_pre, sign, x)


def _sum_series(term, what: str) -> float:
    # Neumaier-compensated running sum; a full fsum per step would be quadratic
    total = 0.0
    comp = 0.0
    small = 0
    for i in range(SERIES_MAX_TERMS):
        t = term(i)
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        partial = total + comp
        if not math.isfinite(partial):
            raise ConvergenceError(f"{what}: partial sums overflow after {i + 1} terms")
        if abs(t) < SERIES_RTOL * (1.0 + abs(partial)):
            small += 1
            if small >= 3:
                return partial
        else:
            small = 0
    raise ConvergenceError(f"{what}: no convergence within {SERIES_MAX_TERMS} terms")


def ml_two_param(alpha: float, beta: float, z: float) -> float:
    r"""Two-parameter Mittag-Leffler function :math:`E_{\alpha,\beta}(z)`.

    Summed as :math:`\sum_i z^i / \Gamma(\alpha i + \beta)` until three
    consecutive terms fall below ``1e-16 * (1 + |partial sum|)``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return _sum_series(
        lambda i: _ml_term(z, i, 1, alpha * i + beta),
        f"E_{{{alpha},{beta}}}({z})",
    )


def ml_two_param_deriv(alpha: float, beta: float, l: int, z: float) -> float:
    r"""Series :math:`\sum_i \frac{(i+l)!}{i!} z^i / \Gamma(\alpha i + \alpha l + \beta)`.

    This is the :math:`l`-th derivative of :math:`E_{\alpha,\beta}` in the
    normalization used by the constant-coefficient Green's function formulas;
    ``l = 0`` reduces to :func:`ml_two_param`.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if l < 0 or int(l) != l:
        raise ValueError(f"l must be a nonnegative integer, got {l}")
    l = int(l)
    return _sum_series(
        lambda i: _ml_term(z, i, math.perm(i + l, l), alpha * (i + l) + beta),
        f"E^({l})_{{{alpha},{beta}}}({z})",
    )


@dataclass(frozen=True)
class MLParams:
    """Parameters of a (multivariate) Mittag-Leffler function."""

    #: exponents multiplying the multi-index entries; all positive
    alphas: tuple[float, ...]
    #: shift of the Gamma argument
    beta: float = 1.0

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise ValueError("MLParams needs at least one alpha")
        if any(not a > 0 for a in alphas):
            raise ValueError(f"all alphas must be positive, got {alphas}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "beta", float(self.beta))


def compositions(k: int, m: int) -> Iterator[tuple[int, ...]]:
    """Yield all ``m``-tuples of nonnegative integers summing to ``k``.

    Tuples come out in lexicographic order, largest first entry first.
    """
    if m == 0:
        if k == 0:
            yield ()
        return
    if m == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, m - 1):
            yield (first, *rest)


def _multinomial(k: int, beta: Sequence[int]) -> int:
    out = 1
    left = k
    for b in beta:
        out *= math.comb(left, b)
        left -= b
    return out


def _layer_terms(params: MLParams, z: Sequence[float], k: int) -> list[float]:
    out = []
    for beta in compositions(k, len(z)):
        x = math.fsum(a * b for a, b in zip(params.alphas, beta)) + params.beta
        if _is_pole(x):
            out.append(0.0)
            continue
        if any(zj == 0.0 and bj > 0 for zj, bj in zip(z, beta)):
            out.append(0.0)
            continue
        mult = _multinomial(k, beta)
        direct = None
        if x <= 170.0 and mult < 1e300:
            try:
                prod = 1.0
                for zj, bj in zip(z, beta):
                    prod *= math.pow(zj, bj)
                direct = float(mult) * prod * rgamma(x)
            except OverflowError:
                direct = None
            if direct is not None and not math.isfinite(direct):
                direct = None
        if direct is None:
            sign = 1.0
            log_pre = math.log(mult)
            for zj, bj in zip(z, beta):
                if bj:
                    log_pre += bj * math.log(abs(zj))
                    if zj < 0 and bj % 2:
                        sign = -sign
            direct = _power_over_gamma(log_pre, sign, x)
        out.append(direct)
    return out


def _as_params(params) -> MLParams:
    if isinstance(params, MLParams):
        return params
    alphas, beta = params
    return MLParams(tuple(alphas), beta)


def ml_multivariate_partial_sums(params, z: Sequence[float]) -> Iterator[float]:
    """Yield the partial sums of the multivariate Mittag-Leffler series.

    One value per multinomial layer ``|beta| = k``, k = 0, 1, ..., stopping
    when two consecutive layers have absolute mass below
    ``1e-16 * (1 + |partial sum|)``.
    """
    params = _as_params(params)
    z = [float(v) for v in z]
    if len(z) != len(params.alphas):
        raise ValueError(
            f"dimension mismatch: {len(params.alphas)} alphas but {len(z)} arguments"
        )
    layers: list[float] = []
    small = 0
    for k in range(LAYER_MAX):
        terms = _layer_terms(params, z, k)
        layers.append(math.fsum(terms))
        partial = math.fsum(layers)
        if not math.isfinite(partial):
            raise ConvergenceError(f"multivariate Mittag-Leffler: overflow at layer {k}")
        yield partial
        mass = math.fsum(abs(t) for t in terms)
        if mass < SERIES_RTOL * (1.0 + abs(partial)):
            small += 1
            if small >= 2:
                return
        else:
            small = 0
    raise ConvergenceError(f"multivariate Mittag-Leffler: no convergence in {LAYER_MAX} layers")


def ml_multivariate(params, z: Sequence[float]) -> float:
    r"""Multivariate Mittag-Leffler function.

    .. math::

        E_{(\alpha_1,\dots,\alpha_m),\beta}(z_1,\dots,z_m) = \sum_{k\ge 0}
            \sum_{|\beta| = k} \frac{k!}{\beta_1!\cdots\beta_m!}
            \frac{z_1^{\beta_1}\cdots z_m^{\beta_m}}
                 {\Gamma(\beta + \sum_j \alpha_j\beta_j)}

    *params* is an :class:`MLParams` or an ``(alphas, beta)`` pair.
    """
    value = math.nan
    for value in ml_multivariate_partial_sums(params, z):
        pass
    return value
