import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiwave.errors import ExpressionEvalError, ExpressionSyntaxError, UnknownIdentifier
from quasiwave.expr import Binary, Const, Neg, Var, derive, evaluate, parse_expr, to_text


def test_identity_power():
    node = parse_expr("(1+theta)^1")
    assert evaluate(node, 0.25) == pytest.approx(1.25)


def test_unbound_name_reports_offset():
    with pytest.raises(UnknownIdentifier) as info:
        parse_expr("(1 + theta)^(a/2)")
    assert info.value.name == "a"
    assert info.value.offset == 13


def test_exp_expression_at_zero():
    assert evaluate(parse_expr("exp(theta) - 1 + 1"), 0.0) == pytest.approx(1.0)


def test_offsets_are_bytes():
    text = "θ + 1"
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expr(text)
    assert info.value.offset == 0
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expr("1 + é")
    assert info.value.offset == 4


@pytest.mark.parametrize("text", ["", "1 +", "(1", "1 2", "theta)", "exp theta", "*3"])
def test_malformed(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expr(text)


def test_precedence():
    assert evaluate(parse_expr("2 + 3 * 4"), 0.0) == 14
    assert evaluate(parse_expr("2 ^ 3 ^ 2"), 0.0) == 2 ** 9
    assert evaluate(parse_expr("-theta^2"), 3.0) == -9.0
    assert evaluate(parse_expr("8 / 4 / 2"), 0.0) == 1.0
    assert evaluate(parse_expr("1 - 2 - 3"), 0.0) == -4.0
    assert evaluate(parse_expr("2^-1"), 0.0) == 0.5


def test_eval_errors():
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("1/theta"), 0.0)
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("log(theta)"), np.array([1.0, -1.0]))
    with pytest.raises(ExpressionEvalError):
        evaluate(parse_expr("theta^0.5"), -1.0)


def test_vectorised():
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(evaluate(parse_expr("theta*theta + 1"), x), x * x + 1)
    np.testing.assert_allclose(evaluate(parse_expr("3"), x), np.full(5, 3.0))


def test_derivative_examples():
    assert derive(Var()) == Const(1.0)
    d = derive(parse_expr("(1+theta)^2"))
    assert evaluate(d, 0.0) == pytest.approx(2.0)
    assert evaluate(d, 1.5) == pytest.approx(5.0)
    assert derive(parse_expr("exp(theta)")) == parse_expr("exp(theta)")


def test_derivative_folds_constants():
    assert derive(parse_expr("3 + 4*2")) == Const(0.0)


def test_round_trip_text():
    for text in ["(1+theta)^(3/2)", "exp(-theta) * log(2 + theta)", "-theta^2 / 4", "2^-1"]:
        node = parse_expr(text)
        again = parse_expr(to_text(node))
        for v in (0.1, 0.7, 1.3):
            assert evaluate(again, v) == pytest.approx(evaluate(node, v))


def test_custom_variable():
    assert evaluate(parse_expr("x^2", variable="x"), 3.0) == 9.0
    with pytest.raises(UnknownIdentifier):
        parse_expr("theta", variable="x")


# random smooth expressions, positive on theta in [0.5, 2]
leaf = st.one_of(st.just(Var()), st.floats(0.5, 3.0).map(Const))


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+*"), children, children).map(lambda t: Binary(t[0], t[1], t[2])),
        st.tuples(children, st.floats(-2, 2)).map(lambda t: Binary("^", t[0], Const(t[1]))),
        children.map(lambda c: parse_expr("exp(theta)") if c == Var() else Binary("/", Const(1.0), Binary("+", Const(1.0), c))),
    )


positive_exprs = st.recursive(leaf, _extend, max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(positive_exprs, st.floats(0.6, 1.9))
def test_symbolic_matches_finite_difference(node, theta):
    h = 1e-5
    with np.errstate(all="ignore"):
        f_hi, f_lo = evaluate(node, theta + h), evaluate(node, theta - h)
        fd = (f_hi - f_lo) / (2 * h)
        sym = evaluate(derive(node), theta)
    if not all(map(math.isfinite, (f_hi, f_lo, sym))) or abs(sym) > 1e4:
        return
    assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym))


@given(st.floats(-5, 5), st.floats(0.1, 5))
def test_neg_and_binary_agree(a, b):
    node = Binary("-", Const(a), Neg(Const(b)))
    assert evaluate(node, 0.0) == pytest.approx(a + b)
