from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_locus.expr import (
    BinOp,
    Call,
    ExprEvalError,
    ExprSyntaxError,
    Neg,
    Num,
    Var,
    domain_vars,
    eval_float,
    eval_jet,
    parse,
    to_text,
)
from causal_locus.jets import jet_constant, jet_variable

XY = ["x", "y"]


class TestParse:
    def test_f1_tree(self):
        e = parse("y + x^2 + x^3 + y*x^4", XY)
        assert e == BinOp(
            "+",
            BinOp("+", BinOp("+", Var("y"), BinOp("^", Var("x"), Num(2.0))), BinOp("^", Var("x"), Num(3.0))),
            BinOp("*", Var("y"), BinOp("^", Var("x"), Num(4.0))),
        )

    def test_power_binds_tighter_than_unary_minus(self):
        e = parse("-x^2", XY)
        assert e == Neg(BinOp("^", Var("x"), Num(2.0)))
        assert eval_float(e, {"x": 2.0}) == -4.0

    def test_power_is_right_associative(self):
        assert eval_float(parse("2^3^2", []), {}) == 512.0
        assert eval_float(parse("2^-1", []), {}) == 0.5

    def test_calls(self):
        e = parse("pow(x, 2) + sqrt(y)", XY)
        assert isinstance(e.left, Call) and e.left.fn == "pow" and len(e.left.args) == 2

    def test_unbalanced_paren_offset(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse("sqrt(1 + x*x", XY)
        # reported at the end of the input, where ')' was expected
        assert info.value.offset == len("sqrt(1 + x*x")
        assert "unbalanced" in info.value.message

    @pytest.mark.parametrize(
        "text, offset",
        [("2x", 1), ("x @ 2", 2), ("z + 1", 0), ("x)", 1), ("((x)", 4), ("x +", 3), ("", 0)],
    )
    def test_error_offsets(self, text, offset):
        with pytest.raises(ExprSyntaxError) as info:
            parse(text, XY)
        assert info.value.offset == offset

    @pytest.mark.parametrize("text", ["sin(x, y)", "pow(x)", "exp()"])
    def test_arity(self, text):
        with pytest.raises(ExprSyntaxError, match="argument"):
            parse(text, XY)

    def test_variables_are_declared_per_context(self):
        assert parse("x1 + x2", domain_vars(2)) is not None
        with pytest.raises(ExprSyntaxError, match="unknown identifier 'x3'"):
            parse("x3", domain_vars(2))
        with pytest.raises(ExprSyntaxError):
            parse("x + y", domain_vars(3))

    @pytest.mark.parametrize(
        "text",
        ["y + x^2 + x^3 + y*x^4", "(x + 1)*tanh(y)", "sqrt(x^2 + (y + 1)^2) - 1", "pow(2 + x, -1.5)/exp(-y)"],
    )
    def test_invalid_prefixes_rejected(self, text):
        for k in range(len(text)):
            prefix = text[:k]
            try:
                parse(prefix, XY)
                valid = True
            except ExprSyntaxError:
                valid = False
            if valid:
                # every accepted prefix must be a complete expression on its own
                assert eval_float(parse(prefix, XY), {"x": 0.3, "y": 0.2}) is not None


@st.composite
def poly_exprs(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        if draw(st.booleans()):
            return draw(st.sampled_from(["x", "y"]))
        return repr(draw(st.floats(-3, 3, allow_nan=False).map(lambda v: round(v, 3))))
    op = draw(st.sampled_from(["+", "-", "*", "^"]))
    a = draw(poly_exprs(depth=depth - 1))
    if op == "^":
        return f"({a})^{draw(st.integers(0, 3))}"
    b = draw(poly_exprs(depth=depth - 1))
    return f"({a} {op} {b})"


class TestRoundTrip:
    @settings(max_examples=100, deadline=None)
    @given(poly_exprs())
    def test_print_parse(self, text):
        e = parse(text, XY)
        assert parse(to_text(e), XY) == e

    @settings(max_examples=100, deadline=None)
    @given(poly_exprs(), st.floats(-1, 1), st.floats(-1, 1))
    def test_order_zero_jet_equals_float(self, text, x, y):
        e = parse(text, XY)
        j = eval_jet(e, {"x": jet_constant(x, 2, 0), "y": jet_constant(y, 2, 0)})
        assert j.constant == pytest.approx(eval_float(e, {"x": x, "y": y}), rel=1e-12, abs=1e-12)


class TestEvalJet:
    def test_f1_at_one_zero(self):
        e = parse("y + x^2 + x^3 + y*x^4", XY)
        j = eval_jet(e, {"x": jet_constant(1.0, 2, 0), "y": jet_constant(0.0, 2, 0)})
        assert j.constant == 2.0

    def test_kobayashi_first_order(self):
        e = parse("(x+1)*tanh(y)", XY)
        j = eval_jet(e, {"x": jet_variable(0, 0.0, 2, 1), "y": jet_variable(1, 0.0, 2, 1)})
        np.testing.assert_array_equal(j.coeffs, [0.0, 0.0, 1.0])

    def test_constant_in_any_env(self):
        j = eval_jet(parse("3", XY), {"x": jet_variable(0, 0.5, 2, 3), "y": jet_variable(1, 0.1, 2, 3)})
        assert j.constant == 3.0 and j.order == 3
        assert not np.any(j.coeffs[1:])

    @settings(max_examples=200, deadline=None)
    @given(poly_exprs(), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
    def test_derivatives_match_finite_differences(self, text, x, y):
        e = parse(text, XY)
        j = eval_jet(e, {"x": jet_variable(0, x, 2, 2), "y": jet_variable(1, y, 2, 2)})
        h = 1e-4

        def f(a, b):
            return eval_float(e, {"x": a, "y": b})

        scale = 1.0 + abs(j.constant)
        assert j.gradient()[0] == pytest.approx((f(x + h, y) - f(x - h, y)) / (2 * h), abs=1e-6 * scale * 1e2)
        assert j.gradient()[1] == pytest.approx((f(x, y + h) - f(x, y - h)) / (2 * h), abs=1e-6 * scale * 1e2)

    def test_errors(self):
        env = {"x": jet_constant(-1.0, 2, 1), "y": jet_constant(0.0, 2, 1)}
        with pytest.raises(ExprEvalError):
            eval_jet(parse("sqrt(x)", XY), env)
        with pytest.raises(ExprEvalError):
            eval_jet(parse("1/y", XY), env)
        with pytest.raises((ExprEvalError, KeyError)):
            eval_jet(parse("x + y", XY), {"x": jet_constant(1.0, 2, 1)})
