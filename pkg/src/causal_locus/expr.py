"""A small analytic expression language evaluated on floats or jets.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ "^" unary ] ;          (* right associative *)
    atom    = number | name | call | "(" expr ")" ;
    call    = func "(" expr { "," expr } ")" ;
    func    = "sqrt" | "exp" | "log" | "sin" | "cos" | "tanh" | "pow" ;
    number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ]
            | "." digit { digit } [ exponent ] ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``; ``2^-1`` is
allowed. Implicit multiplication is not: ``2x`` is a lexical error.

The parser is a Pratt (top-down operator precedence) parser.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .jets import Jet, JetDomainError, jet_compose_analytic, jet_pow

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "ExprEvalError",
    "FUNCTIONS",
    "parse",
    "to_text",
    "eval_jet",
    "eval_float",
    "compile_expr",
    "variables",
    "domain_vars",
    "ambient_vars",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Lexical or syntactic error; ``offset`` is a 0-based character index."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class ExprEvalError(ExprError):
    """Evaluation failed: unbound variable, domain violation, zero divisor."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = {"sqrt": 1, "exp": 1, "log": 1, "sin": 1, "cos": 1, "tanh": 1, "pow": 2}


def domain_vars(n: int) -> list[str]:
    """Variable names for functions on the graph domain (x1..xn, plus x, y when n = 2)."""
    names = [f"x{i}" for i in range(1, n + 1)]
    if n == 2:
        names += ["x", "y"]
    return names


def ambient_vars(n: int) -> list[str]:
    """Variable names for metric components on the (n+1)-dimensional chart."""
    names = ["t"] + [f"x{i}" for i in range(n + 1)]
    if n == 2:
        names += ["x", "y"]
    return names


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
            if kind == "num" and m.end() < len(text) and (text[m.end()].isalpha() or text[m.end()] == "_"):
                raise ExprSyntaxError(
                    "implicit multiplication is not supported (use '*')", m.end(), text
                )
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# ---------------------------------------------------------------------------
# Pratt parser

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, text: str, allowed: frozenset):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed
        self.open_parens: list[int] = []

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, pos: int):
        raise ExprSyntaxError(msg, pos, self.text)

    def expect_close(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == ")":
            self.advance()
            self.open_parens.pop()
            return
        if tok.kind == "end":
            opened = self.open_parens[-1]
            self.error(f"unbalanced parenthesis (opened at offset {opened})", tok.pos)
        self.error(f"expected ')' but found {tok.text!r}", tok.pos)

    def expression(self, rbp: int = 0) -> Expr:
        left = self.nud(self.advance())
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in _BINARY_BP:
                break
            lbp = _BINARY_BP[tok.text]
            if lbp <= rbp:
                break
            self.advance()
            if tok.text == "^":
                # right associative; the exponent may carry a unary minus
                right = self.expression(lbp - 1)
            else:
                right = self.expression(lbp)
            left = BinOp(tok.text, left, right)
        return left

    def nud(self, tok: _Tok) -> Expr:
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                return self.call(tok)
            if tok.text not in self.allowed:
                self.error(f"unknown identifier {tok.text!r}", tok.pos)
            return Var(tok.text)
        if tok.kind == "op":
            if tok.text == "-":
                return Neg(self.expression(_UNARY_BP))
            if tok.text == "+":
                return self.expression(_UNARY_BP)
            if tok.text == "(":
                self.open_parens.append(tok.pos)
                inner = self.expression(0)
                self.expect_close()
                return inner
            if tok.text == ")":
                self.error("unbalanced parenthesis: unexpected ')'", tok.pos)
            self.error(f"unexpected operator {tok.text!r}", tok.pos)
        self.error("unexpected end of input", tok.pos)

    def call(self, name_tok: _Tok) -> Expr:
        tok = self.advance()
        if tok.kind != "op" or tok.text != "(":
            self.error(f"function {name_tok.text!r} must be called with '('", tok.pos)
        self.open_parens.append(tok.pos)
        want = FUNCTIONS[name_tok.text]
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == ")":
            self.error(f"{name_tok.text} takes {want} argument(s), got 0", name_tok.pos)
        args = [self.expression(0)]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.expression(0))
        self.expect_close()
        if len(args) != want:
            self.error(
                f"{name_tok.text} takes {want} argument(s), got {len(args)}", name_tok.pos
            )
        return Call(name_tok.text, tuple(args))

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            self.error("empty expression", 0)
        e = self.expression(0)
        tok = self.peek()
        if tok.kind != "end":
            if tok.kind == "op" and tok.text == ")":
                self.error("unbalanced parenthesis: unexpected ')'", tok.pos)
            self.error(f"unexpected token {tok.text!r}", tok.pos)
        return e


def parse(text: str, allowed_vars: Iterable[str]) -> Expr:
    """Parse ``text`` allowing only the variable names in ``allowed_vars``."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text if isinstance(text, str) else "")
    return _Parser(text, frozenset(allowed_vars)).parse()


# ---------------------------------------------------------------------------
# printing


def to_text(e: Expr) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(to_text(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return set().union(*(variables(a) for a in e.args))


# ---------------------------------------------------------------------------
# evaluation (floats and jets share one compiled closure)


def _is_jet(v) -> bool:
    return isinstance(v, Jet)


def _apply_unary(fn: str, v):
    if _is_jet(v):
        return jet_compose_analytic(fn, v)
    try:
        if fn == "sqrt":
            if v < 0:
                raise ValueError
            return math.sqrt(v)
        if fn == "log":
            if v <= 0:
                raise ValueError
            return math.log(v)
        return getattr(math, fn)(v)
    except (ValueError, OverflowError):
        raise JetDomainError(f"{fn} is undefined at {v!r}") from None


def _apply_pow(base, expo):
    if _is_jet(base) or _is_jet(expo):
        if not _is_jet(base):
            base = expo * 0.0 + base
        if _is_jet(expo) and not expo.is_constant():
            return jet_pow(base, expo)
        p = expo.constant if _is_jet(expo) else float(expo)
        if not float(p).is_integer() and base.constant <= 0.0:
            raise JetDomainError(
                f"non-integer power {p} needs a positive base, got {base.constant!r}"
            )
        return jet_pow(base, p)
    p = float(expo)
    if not p.is_integer() and base <= 0.0:
        raise JetDomainError(f"non-integer power {p} needs a positive base, got {base!r}")
    try:
        return float(base) ** p
    except ZeroDivisionError:
        raise ExprEvalError("zero raised to a negative power") from None


def _apply_div(a, b):
    if _is_jet(b):
        if b.constant == 0.0:
            raise ExprEvalError("division by a jet with zero constant term")
        return a / b
    if b == 0:
        raise ExprEvalError("division by zero")
    return a / b


@functools.lru_cache(maxsize=4096)
def compile_expr(e: Expr):
    """Compile ``e`` into a closure ``env -> value`` (works on floats and jets)."""
    if isinstance(e, Num):
        val = float(e.value)
        return lambda env: val
    if isinstance(e, Var):
        name = e.name

        def var(env):
            try:
                return env[name]
            except KeyError:
                raise ExprEvalError(f"unbound variable {name!r}") from None

        return var
    if isinstance(e, Neg):
        inner = compile_expr(e.operand)
        return lambda env: -inner(env)
    if isinstance(e, BinOp):
        lf, rf = compile_expr(e.left), compile_expr(e.right)
        if e.op == "+":
            return lambda env: lf(env) + rf(env)
        if e.op == "-":
            return lambda env: lf(env) - rf(env)
        if e.op == "*":
            return lambda env: lf(env) * rf(env)
        if e.op == "/":
            return lambda env: _apply_div(lf(env), rf(env))
        if e.op == "^":
            return lambda env: _apply_pow(lf(env), rf(env))
        raise ValueError(f"unknown operator {e.op!r}")
    if isinstance(e, Call):
        fs = [compile_expr(a) for a in e.args]
        if e.fn == "pow":
            f0, f1 = fs
            return lambda env: _apply_pow(f0(env), f1(env))
        fn = e.fn
        f0 = fs[0]
        return lambda env: _apply_unary(fn, f0(env))
    raise TypeError(f"not an expression: {e!r}")


def _bind_constant_like(value, env: Mapping):
    # promote bare constants to a jet of the environment's shape
    if _is_jet(value):
        return value
    for v in env.values():
        if _is_jet(v):
            return v * 0.0 + float(value)
    return value


def eval_jet(e: Expr, env: Mapping[str, Jet]) -> Jet:
    """Evaluate ``e`` with jets bound to its variables."""
    shapes = {(v.nvars, v.order) for v in env.values() if _is_jet(v)}
    if len(shapes) > 1:
        raise ExprEvalError(f"environment mixes jet shapes {sorted(shapes)}")
    try:
        out = compile_expr(e)(env)
    except JetDomainError as exc:
        raise ExprEvalError(str(exc)) from exc
    return _bind_constant_like(out, env)


def eval_float(e: Expr, env: Mapping[str, float]) -> float:
    try:
        return float(compile_expr(e)(env))
    except JetDomainError as exc:
        raise ExprEvalError(str(exc)) from exc
