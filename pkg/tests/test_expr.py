import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathcalc import expr
from pathcalc.errors import ConfigError, EvaluationError


def ev(text, t=0.0, x=(0.0,)):
    return expr.parse(text).compile()(t, list(x))


@pytest.mark.parametrize("text, t, x, want", [
    ("1+2*3", 0, [0], 7.0),
    ("2^3^2", 0, [0], 512.0),
    ("-2^2", 0, [0], -4.0),
    ("2**-1", 0, [0], 0.5),
    ("t*x^2", 2.0, [3.0], 18.0),
    ("x1*x2 - x2/x1", 0, [2.0, 4.0], 6.0),
    ("exp(log(3))", 0, [0], 3.0),
    ("sin(0)+cos(0)", 0, [0], 1.0),
    ("1+2*x-x^2+x^4/4", 0, [2.0], 5.0),
    (".5e1", 0, [0], 5.0),
])
def test_evaluation(text, t, x, want):
    assert ev(text, t, x) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("text", ["", "   ", "1+", "(1", "x)", "foo(x)", "y", "1 $ 2", "exp x", "2 3"])
def test_malformed_is_config_error(text):
    with pytest.raises(ConfigError):
        expr.parse(text)


def test_domain_failure_is_evaluation_error():
    with pytest.raises(EvaluationError):
        ev("log(x)", x=[-1.0])
    with pytest.raises(EvaluationError):
        ev("1/x", x=[0.0])


def test_x_is_alias_of_x1_and_max_index():
    assert ev("x", x=[4.0]) == ev("x1", x=[4.0])
    assert expr.max_index(expr.parse("x3 + x1*t")) == 3
    assert expr.max_index(expr.parse("t^2")) == 0


@pytest.mark.parametrize("text, var, want", [
    ("t*x^2", "x1", "2*t*x"),
    ("t*x^2", "t", "x^2"),
    ("exp(2*x)", "x1", "2*exp(2*x)"),
    ("sin(x)*cos(t)", "x1", "cos(x)*cos(t)"),
    ("log(x)", "x1", "1/x"),
    ("x1*x2", "x2", "x1"),
    ("x^x", "x1", "x^x*(log(x)+1)"),
])
def test_symbolic_derivative(text, var, want):
    d = expr.parse(text).diff(var).compile()
    ref = expr.parse(want).compile()
    for t, x in [(0.3, [1.7, 0.4]), (1.1, [0.6, -2.0])]:
        assert d(t, x) == pytest.approx(ref(t, x), rel=1e-12)


finite = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(a=finite, b=finite, t=finite, x=finite)
def test_derivative_matches_central_difference(a, b, t, x):
    # polynomial-times-exponential family with closed-form values everywhere
    text = f"({a})*x^3 + ({b})*t*x + exp(0.5*x)*sin(t)"
    f = expr.parse(text).compile()
    fx = expr.parse(text).diff("x1").compile()
    h = 1e-6
    fd = (f(t, [x + h]) - f(t, [x - h])) / (2 * h)
    assert fx(t, [x]) == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_str_round_trip_evaluates_identically():
    node = expr.parse("-(x-1)^2/(1+t) + 3*exp(-x)")
    again = expr.parse(str(node))
    for x in (-1.0, 0.0, 2.5):
        assert again.compile()(0.7, [x]) == pytest.approx(node.compile()(0.7, [x]), rel=1e-15)


def test_constant_folding():
    assert expr.parse("x*0").diff("x1").is_const(0.0)
    assert math.isclose(ev("2*3+0*x"), 6.0)
