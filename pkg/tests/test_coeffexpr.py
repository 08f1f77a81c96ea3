import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcekit.coeffexpr import (Binary, CoefficientFn, Const, ExprSyntaxError, Pow, SingularityError,
                              Unary, Var, array_function, compile_program, differentiate,
                              evaluate, parse_expression, singular_points, to_string)
from fractions import Fraction


def test_bessel_w02_value():
    e = parse_expression("(4*25-1)/(4*t^2)-1")
    assert evaluate(e, 1.0) == pytest.approx(23.75, abs=1e-14)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as ei:
        parse_expression("1+*t")
    assert ei.value.offset == 2


@pytest.mark.parametrize("src", ["t^t", "t^0.123456789", "foo(t)", "(1+t", "1+"])
def test_rejected(src):
    with pytest.raises(ExprSyntaxError):
        parse_expression(src)


def test_derivative_of_shift():
    # d/dt(-1/(2t)) = 1/(2t^2)
    d = differentiate(parse_expression("-1/(2*t)"))
    assert evaluate(d, 2.0) == pytest.approx(0.125, abs=1e-15)


def test_power_right_associative():
    assert evaluate(parse_expression("2^3^2"), 0.0) == 512.0


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse_expression("-t^2"), 3.0) == -9.0


def test_rational_exponent():
    e = parse_expression("t^(3/2)")
    assert isinstance(e, Pow) and e.exponent == Fraction(3, 2)
    assert evaluate(e, 4.0) == pytest.approx(8.0)


def test_singularity_raised():
    e = parse_expression("1/t")
    with pytest.raises(SingularityError):
        evaluate(e, 0.0)
    with pytest.raises(SingularityError):
        evaluate(e, np.array([1.0, 0.0]))


def test_singular_points():
    assert singular_points(parse_expression("1-25/t^2")) == [0.0]
    assert singular_points(parse_expression("ln(t-2)")) == [2.0]
    assert singular_points(parse_expression("cos(t)")) == []


def test_coefficient_fn_arithmetic():
    a = CoefficientFn.from_expr("t^2")
    b = CoefficientFn.from_expr("sin(t)")
    c = a * b + 3.0
    t = np.linspace(0.1, 2.0, 7)
    np.testing.assert_allclose(c(t), t ** 2 * np.sin(t) + 3.0, rtol=1e-14)
    np.testing.assert_allclose(c.d(t), 2 * t * np.sin(t) + t ** 2 * np.cos(t), rtol=1e-13)
    assert CoefficientFn.from_expr("4").is_constant()


def test_compile_program_stack_machine():
    code, consts = compile_program(parse_expression("2*t+cos(t)"))
    assert all(isinstance(c, int) for c in code)
    assert 2.0 in consts


# ---- random expressions: printing round trip and derivative vs differences

_leaf = st.one_of(st.just(Var()),
                  st.integers(1, 9).map(lambda k: Const(float(k))))


def _grow(children):
    safe_unary = st.sampled_from(["cos", "sin", "neg"])
    return st.one_of(
        st.tuples(safe_unary, children).map(lambda p: Unary(p[0], p[1])),
        st.tuples(st.sampled_from(["+", "-", "*"]), children, children)
        .map(lambda p: Binary(p[0], p[1], p[2])),
        st.tuples(children, st.integers(2, 3)).map(lambda p: Pow(p[0], Fraction(p[1]))),
        st.tuples(children, children)
        .map(lambda p: Binary("/", p[0], Binary("+", Const(3.0), Unary("cos", p[1])))),
    )


expressions = st.recursive(_leaf, _grow, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(expressions)
def test_random_expressions(e):
    t = np.linspace(-1.3, 1.7, 9)
    v = array_function(e)(t) * np.ones_like(t)
    again = parse_expression(to_string(e), simplified=False)
    np.testing.assert_allclose(array_function(again)(t) * np.ones_like(t), v,
                               rtol=1e-12, atol=1e-12)
    d = array_function(differentiate(e))(t) * np.ones_like(t)
    h = 1e-5
    fd = (array_function(e)(t + h) - array_function(e)(t - h)) / (2 * h)
    scale = 1.0 + np.abs(d) + np.abs(v)
    assert np.all(np.abs(d - fd) <= 1e-4 * scale)
