r"""Exact algebra of generalized power series under fractional calculus.

A :class:`GeneralizedPowerSeries` is a finite sum :math:`\sum c_i s^{\mu_i}`
with :math:`s = t - a` for a fixed origin :math:`a` and real exponents
:math:`\mu_i > -1`. The class is closed under Riemann-Liouville integration and
differentiation with origin :math:`a` (the power rule) and under multiplication
by polynomials in :math:`t`.

A :class:`BivariatePowerSeries` holds terms :math:`c\,\tau^\nu (t-\tau)^\mu`
with integer :math:`\nu \ge 0`; it is the natural home of a Green's function
built with a moving origin :math:`\tau` and polynomial coefficients.

Exponents are floats. Terms whose exponents differ by at most
:data:`EXPONENT_TOL` are merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from fracgreen.exceptions import DomainError, TermOverflowError
from fracgreen.special_functions import gamma_ratio

__all__ = [
    "EXPONENT_TOL",
    "BivariatePowerSeries",
    "BivariateTerm",
    "GeneralizedPowerSeries",
    "PowerTerm",
    "bi_poly_multiply",
    "bi_rl_integral",
    "evaluate",
    "format_series",
    "is_annihilated",
    "parse_series",
    "poly_coefficients",
    "poly_multiply",
    "rl_derivative",
    "rl_integral",
    "shift_polynomial",
]

EXPONENT_TOL = 1e-12
ANNIHILATION_TOL = 1e-10
COEFF_FLOOR = 1e-300
MAX_TERMS = 20_000


class PowerTerm(NamedTuple):
    coeff: float
    exponent: float


class BivariateTerm(NamedTuple):
    coeff: float
    tau_exp: int
    s_exp: float


def _check_count(n: int, max_terms: int) -> None:
    if n > max_terms:
        raise TermOverflowError(f"power series has {n} terms (cap {max_terms})")


def _merge_sorted(items, key_same, combine):
    out = []
    for item in items:
        if out and key_same(out[-1][0], item):
            out[-1][1].append(item)
        else:
            out.append((item, [item]))
    return [combine(group) for _, group in out]


def _normalize_terms(terms: Iterable, max_terms: int) -> tuple[PowerTerm, ...]:
    raw = []
    for c, mu in terms:
        c = float(c)
        mu = float(mu)
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {c} for exponent {mu}")
        if not mu > -1.0:
            raise DomainError(f"exponent {mu} <= -1 is not locally integrable")
        raw.append((mu, c))
    raw.sort()
    merged = _merge_sorted(
        raw,
        lambda first, item: abs(item[0] - first[0]) <= EXPONENT_TOL,
        lambda group: PowerTerm(math.fsum(c for _, c in group), group[0][0]),
    )
    out = tuple(t for t in merged if abs(t.coeff) >= COEFF_FLOOR)
    _check_count(len(out), max_terms)
    return out


@dataclass(frozen=True)
class GeneralizedPowerSeries:
    r"""Finite sum :math:`\sum_i c_i (t - a)^{\mu_i}` with :math:`\mu_i > -1`.

    Terms are kept sorted by exponent with near-equal exponents merged and
    zero coefficients pruned; construct with any iterable of ``(coeff,
    exponent)`` pairs.
    """

    terms: tuple[PowerTerm, ...] = ()
    #: expansion point :math:`a`
    origin: float = 0.0
    max_terms: int = MAX_TERMS

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize_terms(self.terms, self.max_terms))
        object.__setattr__(self, "origin", float(self.origin))

    @classmethod
    def monomial(cls, coeff: float, exponent: float, origin: float = 0.0):
        return cls(((coeff, exponent),), origin)

    # {{{ container protocol

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([t.coeff for t in self.terms])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([t.exponent for t in self.terms])

    @property
    def lowest_exponent(self) -> float:
        return self.terms[0].exponent if self.terms else math.inf

    def coefficient_at(self, exponent: float, tol: float = EXPONENT_TOL) -> float:
        """Coefficient of the term with the given exponent (0 if absent)."""
        for t in self.terms:
            if abs(t.exponent - exponent) <= tol:
                return t.coeff
        return 0.0

    # }}}

    # {{{ arithmetic

    def _same_origin(self, other: GeneralizedPowerSeries) -> None:
        if self.origin != other.origin:
            raise ValueError(f"origin mismatch: {self.origin} != {other.origin}")

    def __add__(self, other):
        if not isinstance(other, GeneralizedPowerSeries):
            return NotImplemented
        self._same_origin(other)
        return GeneralizedPowerSeries(self.terms + other.terms, self.origin, self.max_terms)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if not isinstance(other, GeneralizedPowerSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: float) -> GeneralizedPowerSeries:
        return GeneralizedPowerSeries(
            [(factor * t.coeff, t.exponent) for t in self.terms], self.origin, self.max_terms
        )

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        if isinstance(other, GeneralizedPowerSeries):
            self._same_origin(other)
            return GeneralizedPowerSeries(
                [
                    (a.coeff * b.coeff, a.exponent + b.exponent)
                    for a in self.terms
                    for b in other.terms
                ],
                self.origin,
                self.max_terms,
            )
        return NotImplemented

    __rmul__ = __mul__

    # }}}

    def __call__(self, t):
        return evaluate(self, t)

    def abs_bound(self, horizon: float) -> float:
        r""":math:`\sum |c_i| (T - a)^{\mu_i}`: the sup over :math:`[a, T]` of
        the majorizing series when all exponents are nonnegative."""
        length = horizon - self.origin
        return math.fsum(abs(t.coeff) * length**t.exponent for t in self.terms)

    def almost_equal(self, other, rtol: float = 1e-12, atol: float = 0.0) -> bool:
        """Term-wise comparison: same exponents, coefficients within tolerance."""
        if len(self) != len(other) or self.origin != other.origin:
            return False
        return all(
            abs(a.exponent - b.exponent) <= EXPONENT_TOL
            and abs(a.coeff - b.coeff) <= atol + rtol * max(abs(a.coeff), abs(b.coeff))
            for a, b in zip(self.terms, other.terms)
        )


def _normalize_biterms(terms: Iterable, max_terms: int) -> tuple[BivariateTerm, ...]:
    raw = []
    for c, nu, mu in terms:
        c = float(c)
        mu = float(mu)
        if int(nu) != nu or nu < 0:
            raise ValueError(f"tau exponent must be a nonnegative integer, got {nu}")
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {c}")
        if not mu > -1.0:
            raise DomainError(f"exponent {mu} <= -1 is not locally integrable")
        raw.append((int(nu), mu, c))
    raw.sort()
    merged = _merge_sorted(
        raw,
        lambda first, item: item[0] == first[0] and abs(item[1] - first[1]) <= EXPONENT_TOL,
        lambda group: BivariateTerm(math.fsum(g[2] for g in group), group[0][0], group[0][1]),
    )
    out = tuple(t for t in merged if abs(t.coeff) >= COEFF_FLOOR)
    _check_count(len(out), max_terms)
    return out


@dataclass(frozen=True)
class BivariatePowerSeries:
    r"""Finite sum :math:`\sum_i c_i \tau^{\nu_i} (t - \tau)^{\mu_i}`.

    Terms are sorted by ``(tau_exp, s_exp)``; construct from ``(coeff,
    tau_exp, s_exp)`` triples.
    """

    terms: tuple[BivariateTerm, ...] = ()
    max_terms: int = MAX_TERMS

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize_biterms(self.terms, self.max_terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other):
        if not isinstance(other, BivariatePowerSeries):
            return NotImplemented
        return BivariatePowerSeries(self.terms + other.terms, self.max_terms)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: float) -> BivariatePowerSeries:
        return BivariatePowerSeries(
            [(factor * t.coeff, t.tau_exp, t.s_exp) for t in self.terms], self.max_terms
        )

    def __call__(self, t, tau):
        return evaluate(self, t, tau)

    def at_tau(self, tau: float) -> GeneralizedPowerSeries:
        """Freeze ``tau`` and return the univariate series in ``t - tau``."""
        tau = float(tau)
        return GeneralizedPowerSeries(
            [(t.coeff * tau**t.tau_exp, t.s_exp) for t in self.terms], origin=tau
        )

    def abs_bound(self, horizon: float) -> float:
        r""":math:`\sum |c_i| T^{\nu_i + \mu_i}`, bounding the series on
        :math:`0 \le \tau < t \le T` when all exponents are nonnegative."""
        return math.fsum(abs(t.coeff) * horizon ** (t.tau_exp + t.s_exp) for t in self.terms)

    @property
    def lowest_s_exponent(self) -> float:
        return min((t.s_exp for t in self.terms), default=math.inf)

    def almost_equal(self, other, rtol: float = 1e-12, atol: float = 0.0) -> bool:
        if len(self) != len(other):
            return False
        return all(
            a.tau_exp == b.tau_exp
            and abs(a.s_exp - b.s_exp) <= EXPONENT_TOL
            and abs(a.coeff - b.coeff) <= atol + rtol * max(abs(a.coeff), abs(b.coeff))
            for a, b in zip(self.terms, other.terms)
        )


# {{{ polynomials


def poly_coefficients(poly) -> np.ndarray:
    """Ascending coefficients of a polynomial given as a
    :class:`numpy.polynomial.Polynomial`, a scalar or a coefficient sequence."""
    if isinstance(poly, np.polynomial.Polynomial):
        return np.asarray(poly.coef, dtype=float)
    if np.isscalar(poly):
        return np.array([float(poly)])
    return np.asarray(poly, dtype=float)


def shift_polynomial(poly, origin: float) -> np.ndarray:
    """Coefficients of ``p(origin + s)`` in powers of ``s``."""
    p = poly_coefficients(poly)
    if origin == 0.0:
        return p.copy()
    q = np.zeros_like(p)
    for n, pn in enumerate(p):
        if pn == 0.0:
            continue
        for k in range(n + 1):
            q[k] += pn * math.comb(n, k) * origin ** (n - k)
    return q


# }}}

# {{{ operations


def rl_integral(series: GeneralizedPowerSeries, alpha: float) -> GeneralizedPowerSeries:
    r"""Riemann-Liouville integral of order ``alpha > 0`` with the series' origin.

    Power rule: :math:`c s^\mu \mapsto c\,\Gamma(\mu+1)/\Gamma(\mu+1+\alpha)\,s^{\mu+\alpha}`.
    """
    if not alpha > 0:
        raise ValueError(f"integration order must be positive, got {alpha}")
    return GeneralizedPowerSeries(
        [
            (t.coeff * gamma_ratio(t.exponent + 1.0, t.exponent + 1.0 + alpha), t.exponent + alpha)
            for t in series.terms
        ],
        series.origin,
        series.max_terms,
    )


def is_annihilated(mu: float, alpha: float) -> bool:
    """True when D^alpha maps s^mu to zero (a pole of 1/Gamma(mu + 1 - alpha))."""
    x = mu + 1.0 - alpha
    near = round(x)
    return near <= 0 and abs(x - near) <= ANNIHILATION_TOL


def rl_derivative(series: GeneralizedPowerSeries, alpha: float) -> GeneralizedPowerSeries:
    r"""Riemann-Liouville derivative of order ``alpha >= 0`` with the series' origin.

    :math:`c s^\mu \mapsto c\,\Gamma(\mu+1)/\Gamma(\mu+1-\alpha)\,s^{\mu-\alpha}`;
    terms hitting a pole of the denominator Gamma (:math:`\mu = \alpha - j`)
    are dropped exactly. Raises :class:`DomainError` when a surviving term
    would not be locally integrable.
    """
    if alpha < 0:
        raise ValueError(f"differentiation order must be nonnegative, got {alpha}")
    if alpha == 0:
        return series
    out = []
    for t in series.terms:
        if is_annihilated(t.exponent, alpha):
            continue
        mu = t.exponent - alpha
        if not mu > -1.0:
            raise DomainError(
                f"D^{alpha} of s^{t.exponent} gives s^{mu}, which is not locally integrable"
            )
        out.append((t.coeff * gamma_ratio(t.exponent + 1.0, mu + 1.0), mu))
    return GeneralizedPowerSeries(out, series.origin, series.max_terms)


def rl_operator(series: GeneralizedPowerSeries, order: float) -> GeneralizedPowerSeries:
    """``D^order`` for ``order >= 0`` and ``I^(-order)`` for ``order < 0``."""
    if order < 0:
        return rl_integral(series, -order)
    return rl_derivative(series, order)


def poly_multiply(series: GeneralizedPowerSeries, poly) -> GeneralizedPowerSeries:
    """Multiply by a polynomial in ``t``, re-expanded about the series' origin."""
    q = shift_polynomial(poly, series.origin)
    return GeneralizedPowerSeries(
        [
            (qk * t.coeff, t.exponent + k)
            for k, qk in enumerate(q)
            if qk != 0.0
            for t in series.terms
        ],
        series.origin,
        series.max_terms,
    )


def bi_rl_integral(series: BivariatePowerSeries, alpha: float) -> BivariatePowerSeries:
    """Riemann-Liouville integral in ``t`` with origin ``tau``; ``tau^nu`` is a constant."""
    if not alpha > 0:
        raise ValueError(f"integration order must be positive, got {alpha}")
    return BivariatePowerSeries(
        [
            (
                t.coeff * gamma_ratio(t.s_exp + 1.0, t.s_exp + 1.0 + alpha),
                t.tau_exp,
                t.s_exp + alpha,
            )
            for t in series.terms
        ],
        series.max_terms,
    )


def bi_poly_multiply(series: BivariatePowerSeries, poly) -> BivariatePowerSeries:
    r"""Multiply by a polynomial in ``t`` using :math:`t^n = (\tau + s)^n`."""
    p = poly_coefficients(poly)
    out = []
    for n, pn in enumerate(p):
        if pn == 0.0:
            continue
        for k in range(n + 1):
            w = pn * math.comb(n, k)
            for t in series.terms:
                out.append((w * t.coeff, t.tau_exp + n - k, t.s_exp + k))
    return BivariatePowerSeries(out, series.max_terms)


def evaluate(series, t, tau=None):
    """Evaluate a univariate series at ``t`` or a bivariate one at ``(t, tau)``.

    Accepts scalars or arrays (broadcast). Terms are summed in ascending
    exponent order.
    """
    scalar = np.isscalar(t) and (tau is None or np.isscalar(tau))
    t = np.asarray(t, dtype=float)
    if isinstance(series, BivariatePowerSeries):
        if tau is None:
            raise TypeError("bivariate series needs tau")
        tau = np.asarray(tau, dtype=float)
        if np.any(t <= tau) or np.any(tau < 0):
            raise DomainError("bivariate series needs t > tau >= 0")
        s = t - tau
        acc = np.zeros(np.broadcast(t, tau).shape)
        for term in sorted(series.terms, key=lambda x: (x.s_exp + x.tau_exp, x.tau_exp)):
            acc = acc + term.coeff * tau**term.tau_exp * s**term.s_exp
    else:
        if tau is not None and tau != series.origin:
            raise ValueError("tau given for a univariate series with a different origin")
        if np.any(t <= series.origin):
            raise DomainError(f"series with origin {series.origin} needs t > origin")
        s = t - series.origin
        acc = np.zeros(s.shape)
        for term in series.terms:
            acc = acc + term.coeff * s**term.exponent
    return float(acc) if scalar else acc


# }}}

# {{{ text format


def format_series(series) -> str:
    """One term per line, ``coeff * tau^nu * (t-tau)^mu``, 17 significant digits.

    Univariate series are written as ``coeff * (t-a)^mu`` with their origin.
    """
    lines = []
    if isinstance(series, BivariatePowerSeries):
        for t in series.terms:
            lines.append(f"{t.coeff:.17g} * tau^{t.tau_exp} * (t-tau)^{t.s_exp:.17g}")
    else:
        for t in series.terms:
            lines.append(f"{t.coeff:.17g} * (t-{series.origin:.17g})^{t.exponent:.17g}")
    return "\n".join(lines)


def parse_series(text: str):
    """Inverse of :func:`format_series`."""
    biterms = []
    uniterms = []
    origin = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("*")]
        try:
            if len(parts) == 3 and parts[1].startswith("tau^"):
                coeff = float(parts[0])
                nu = int(parts[1][4:])
                mu = float(parts[2].split(")^", 1)[1])
                biterms.append((coeff, nu, mu))
            elif len(parts) == 2 and parts[1].startswith("(t-"):
                coeff = float(parts[0])
                base, mu = parts[1].split(")^", 1)
                o = float(base[3:])
                if origin is not None and o != origin:
                    raise ValueError("mixed origins")
                origin = o
                uniterms.append((coeff, float(mu)))
            else:
                raise ValueError("unrecognized term")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse term {line!r}: {exc}") from None
    if biterms and uniterms:
        raise ValueError("mixed univariate and bivariate terms")
    if biterms:
        return BivariatePowerSeries(biterms)
    return GeneralizedPowerSeries(uniterms, origin or 0.0)


# }}}
