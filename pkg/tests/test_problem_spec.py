import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracgreen.exceptions import SpecParseError, SpecValidationError
from fracgreen.neumann_engine import Sampled
from fracgreen.problem_spec import TAIL_TOL_ENV, Expression, ProblemSpec, parse_spec, render
from fracgreen.special_functions import gamma

EX1 = """\
[operator]
orders = 1.5, 0.5
a1 = t
"""

EX2 = """\
# singular forcing
[operator]
orders = 1.5, 0.5, 0
a1 = t^2
a2 = t**3   ; trailing comment

[rhs]
h = t^-0.8 / gamma(0.2)
"""


# {{{ expressions


@pytest.mark.parametrize("source,terms", [
    ("t", {1.0: 1.0}),
    ("2*t^2 - t + 3", {2.0: 2.0, 1.0: -1.0, 0.0: 3.0}),
    ("(1 + t)^2", {0.0: 1.0, 1.0: 2.0, 2.0: 1.0}),
    ("t^-0.8 / gamma(0.2)", {-0.8: 1 / gamma(0.2)}),
    ("sqrt(t) * t", {1.5: 1.0}),
    ("pi * t^0.5", {0.5: math.pi}),
    ("-t", {1.0: -1.0}),
    ("t - t", {}),
])
def test_power_sums(source, terms):
    ps = {mu: c for mu, c in Expression(source).power_sum.items() if c != 0}
    assert sorted(ps) == pytest.approx(sorted(terms))
    assert [ps[k] for k in sorted(ps)] == pytest.approx([terms[k] for k in sorted(terms)],
                                                       rel=1e-15)


@pytest.mark.parametrize("source", ["sin(t)", "exp(-t)", "1 / (1 + t)", "t^t"])
def test_non_power_sums(source):
    expr = Expression(source)
    assert expr.power_sum is None
    assert not expr.is_polynomial
    assert isinstance(expr.coefficient(), Sampled)


def test_polynomial_classification():
    assert Expression("1 - t^2").is_polynomial
    assert not Expression("t^0.5").is_polynomial
    assert Expression("3").polynomial().coef.tolist() == [3.0]
    assert Expression("0 * t").is_zero


def test_numeric_evaluation():
    t = np.linspace(0.1, 1, 5)
    np.testing.assert_allclose(Expression("exp(-t) * cos(t)")(t), np.exp(-t) * np.cos(t))
    np.testing.assert_allclose(Expression("2")(t), 2.0)


@pytest.mark.parametrize("source,col", [("t +", 4), ("os.system", 1), ("foo(t)", 1),
                                        ("x", 1), ("t[0]", 1)])
def test_bad_expressions(source, col):
    with pytest.raises(SpecParseError) as info:
        Expression(source)
    assert info.value.column is not None


# }}}

# {{{ parsing


def test_example_operator_is_symbolic():
    spec = parse_spec(EX1)
    assert spec.orders == (1.5, 0.5)
    assert spec.homogeneous
    assert spec.resolved_path == "symbolic"
    op = spec.operator()
    assert op.is_polynomial
    assert op.coeffs[0].coef.tolist() == [0.0, 1.0]


def test_singular_rhs_is_symbolic():
    spec = parse_spec(EX2)
    assert spec.resolved_path == "symbolic"
    assert spec.h_exponent == pytest.approx(-0.8)
    assert spec.rhs.series().terms[0].coeff == pytest.approx(1 / gamma(0.2), rel=1e-15)


def test_general_coefficient_is_numeric():
    spec = parse_spec("[operator]\norders = 0.8, 0.3\na1 = sin(t)\n")
    assert spec.resolved_path == "numeric"
    with pytest.raises(SpecValidationError, match="symbolic path needs"):
        spec.with_path("symbolic")


def test_decreasing_orders_required():
    with pytest.raises(SpecValidationError, match="orders must be strictly decreasing"):
        parse_spec("[operator]\norders = 0.5, 1.5\na1 = t\n")


@pytest.mark.parametrize("text,message", [
    ("[operator]\norders = 1.5, 0.5\n", "coefficients a1..a1 expected"),
    ("[operator]\norders = 1.5\n[rhs]\nh = t^-1.2\n", "exponents must be > -1"),
    ("[operator]\norders = 1.5, 0.5\na2 = t\n", "without gaps"),
    ("[operator]\norders = 1.5\n[numerics]\nhorizon = -1\n", "horizon must be positive"),
    ("[operator]\norders = 1.5\n[numerics]\npath = magic\n", "path must be one of"),
    ("[operator]\norders = 0\n", "alpha_0 must be positive"),
])
def test_validation_errors(text, message):
    with pytest.raises(SpecValidationError, match=message):
        parse_spec(text)


@pytest.mark.parametrize("text,line,column", [
    ("orders = 1.5\n", 1, 1),
    ("[operator]\n  orders 1.5\n", 2, 3),
    ("[operator]\norders = 1.5\n[nope]\n", 3, 1),
    ("[operator]\norders = 1.5\ncolour = red\n", 3, 1),
    ("[operator]\norders = 1.5, x\n", 2, 10),
    ("[operator]\norders = 1.5, 0.5\na1 = t +* 2\n", 3, 9),
    ("[operator]\norders = 1.5\n[numerics]\nN = 10.5\n", 4, 5),
    ("[operator]\norders = 1.5\norders = 2\n", 3, 1),
])
def test_parse_errors_have_positions(text, line, column):
    with pytest.raises(SpecParseError) as info:
        parse_spec(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert str(info.value).startswith(f"line {line}, column {column}: ")


def test_missing_orders():
    with pytest.raises(SpecParseError, match="missing 'orders'"):
        parse_spec("[rhs]\nh = 1\n")


def test_zero_rhs_and_numerics():
    spec = parse_spec(EX1 + "[rhs]\nh = zero\n[numerics]\nN = 512\ngrading = 3\nmax_terms = 50\n")
    assert spec.homogeneous and spec.rhs is None
    assert spec.grid().N == 512 and spec.grid().r == 3.0
    assert spec.policy().max_terms == 50


def test_tail_tol_environment(monkeypatch):
    spec = parse_spec(EX1)
    monkeypatch.setenv(TAIL_TOL_ENV, "1e-8")
    assert spec.policy().tail_tol == 1e-8
    # an explicit file value wins over the environment
    assert parse_spec(EX1 + "[numerics]\ntail_tol = 1e-12\n").policy().tail_tol == 1e-12
    monkeypatch.setenv(TAIL_TOL_ENV, "tiny")
    with pytest.raises(SpecValidationError):
        spec.policy()


# }}}

# {{{ round trip


@pytest.mark.parametrize("text", [EX1, EX2, "[operator]\norders = 0.8, 0.3\na1 = sin(t)\n"
                                  "[rhs]\nh = exp(-t) * t^-0.5\nexponent = -0.5\n"])
def test_render_round_trip(text):
    spec = parse_spec(text)
    assert parse_spec(render(spec)) == spec


coeff_sources = st.sampled_from(["t", "1", "2*t^2 - 1", "sin(t)", "exp(-t)", "0.5 + t"])


@st.composite
def specs(draw):
    m = draw(st.integers(0, 3))
    orders = sorted(draw(st.lists(st.floats(0.0, 3.0), min_size=m + 1, max_size=m + 1,
                                  unique=True)), reverse=True)
    if not orders[0] > 0:
        orders[0] = 0.5 + orders[-1]
        orders = sorted(set(orders), reverse=True)
    m = len(orders) - 1
    coeffs = tuple(Expression(draw(coeff_sources)) for _ in range(m))
    rhs = draw(st.sampled_from([None, Expression("1"), Expression("t^-0.5 + 2*t")]))
    return ProblemSpec(tuple(orders), coeffs, rhs,
                       horizon=draw(st.floats(0.1, 5.0)),
                       N=draw(st.integers(3, 10_000)),
                       grading=draw(st.none() | st.floats(1.0, 4.0)))


@given(specs())
@settings(max_examples=60, deadline=None)
def test_render_round_trip_property(spec):
    assert parse_spec(render(spec)) == spec


# }}}
