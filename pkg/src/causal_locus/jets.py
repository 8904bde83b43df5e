"""Truncated multivariate Taylor series ("jets").

A :class:`Jet` stores the Taylor coefficients of a function of ``nvars``
variables about some base point, truncated at total degree ``order``.
Coefficients are kept densely in graded-lexicographic order: all degree-0
terms, then degree 1, and so on; inside a degree the exponent tuples are
sorted in descending lexicographic order, so for two variables the layout is::

    1, x, y, x^2, x*y, y^2, x^3, ...

Because the layout is graded, truncating a jet to a lower order is just a
prefix slice of the coefficient vector.

Arithmetic is exact truncation of polynomial arithmetic (up to floating
point), which makes jets double as forward-mode automatic differentiation of
any order: the coefficient of ``x^a`` equals ``d^a f / a!``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet",
    "JetDomainError",
    "JetShapeError",
    "jet_constant",
    "jet_variable",
    "jet_add",
    "jet_sub",
    "jet_mul",
    "jet_scale",
    "jet_div",
    "jet_pow",
    "jet_partial",
    "jet_truncate",
    "jet_compose",
    "jet_compose_analytic",
    "KERNELS",
    "multi_indices",
]


class JetDomainError(ValueError):
    """An analytic kernel was applied outside its domain."""


class JetShapeError(ValueError):
    """Two jets with different ``nvars``/``order`` were combined."""


# ---------------------------------------------------------------------------
# layout tables (cached per shape)


@dataclass(frozen=True)
class _Layout:
    exps: np.ndarray  # (N, nvars) exponent table
    degrees: np.ndarray  # (N,)
    index: dict  # exponent tuple -> position


@functools.lru_cache(maxsize=None)
def _layout(nvars: int, order: int) -> _Layout:
    rows = []
    for deg in range(order + 1):
        block = [
            e for e in itertools.product(range(deg, -1, -1), repeat=nvars) if sum(e) == deg
        ]
        block.sort(reverse=True)
        rows.extend(block)
    exps = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
    exps.setflags(write=False)
    degrees = exps.sum(axis=1)
    degrees.setflags(write=False)
    return _Layout(exps, degrees, {e: k for k, e in enumerate(rows)})


def multi_indices(nvars: int, order: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= ``order`` in storage order."""
    return [tuple(int(v) for v in row) for row in _layout(nvars, order).exps]


@functools.lru_cache(maxsize=None)
def _mul_table(nvars: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lay = _layout(nvars, order)
    ia, ib, ic = [], [], []
    for i, ea in enumerate(lay.exps):
        da = int(lay.degrees[i])
        for j, eb in enumerate(lay.exps):
            if da + int(lay.degrees[j]) > order:
                continue
            ia.append(i)
            ib.append(j)
            ic.append(lay.index[tuple(int(v) for v in ea + eb)])
    return np.array(ia), np.array(ib), np.array(ic)


@functools.lru_cache(maxsize=None)
def _partial_table(nvars: int, order: int, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src = _layout(nvars, order)
    dst = _layout(nvars, order - 1)
    s, d, w = [], [], []
    for k, e in enumerate(src.exps):
        if e[i] == 0:
            continue
        e2 = list(int(v) for v in e)
        e2[i] -= 1
        s.append(k)
        d.append(dst.index[tuple(e2)])
        w.append(float(e[i]))
    return np.array(s, dtype=np.int64), np.array(d, dtype=np.int64), np.array(w)


def _size(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


# ---------------------------------------------------------------------------
# the Jet value type


class Jet:
    """Immutable truncated Taylor expansion in ``nvars`` variables.

    Supports ``+ - * /`` with other jets of the same shape and with plain
    numbers, integer powers via ``**``, and unary minus.
    """

    __slots__ = ("nvars", "order", "coeffs")
    __array_priority__ = 1000  # keep numpy scalars from broadcasting over us

    def __init__(self, nvars: int, order: int, coeffs):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        if order < 0:
            raise ValueError("order must be non-negative")
        arr = np.array(coeffs, dtype=float)
        if arr.shape != (_size(nvars, order),):
            raise JetShapeError(
                f"expected {_size(nvars, order)} coefficients for nvars={nvars}, "
                f"order={order}, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "nvars", int(nvars))
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    # -- construction helpers
    @classmethod
    def _raw(cls, nvars: int, order: int, arr: np.ndarray) -> "Jet":
        obj = object.__new__(cls)
        arr.setflags(write=False)
        object.__setattr__(obj, "nvars", nvars)
        object.__setattr__(obj, "order", order)
        object.__setattr__(obj, "coeffs", arr)
        return obj

    @classmethod
    def from_dict(cls, nvars: int, order: int, terms: dict) -> "Jet":
        lay = _layout(nvars, order)
        arr = np.zeros(len(lay.exps))
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != nvars:
                raise JetShapeError(f"exponent {e} has wrong length")
            if sum(e) <= order:
                arr[lay.index[e]] += c
        return cls._raw(nvars, order, arr)

    # -- inspection
    @property
    def constant(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, exponent: Sequence[int]) -> float:
        e = tuple(int(v) for v in exponent)
        if sum(e) > self.order:
            return 0.0
        return float(self.coeffs[_layout(self.nvars, self.order).index[e]])

    def derivative(self, exponent: Sequence[int]) -> float:
        """Partial derivative ``d^a f`` at the base point."""
        return self.coeff(exponent) * math.prod(math.factorial(int(a)) for a in exponent)

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("gradient needs order >= 1")
        return np.array(self.coeffs[1 : 1 + self.nvars])

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("hessian needs order >= 2")
        lay = _layout(self.nvars, self.order)
        n = self.nvars
        h = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                c = self.coeffs[lay.index[tuple(e)]]
                h[i, j] = h[j, i] = 2.0 * c if i == j else c
        return h

    def as_dict(self) -> dict:
        return {e: float(c) for e, c in zip(multi_indices(self.nvars, self.order), self.coeffs) if c != 0.0}

    def evaluate(self, h: Sequence[float]) -> float:
        """Value of the truncated polynomial at displacement ``h``."""
        h = np.asarray(h, dtype=float)
        exps = _layout(self.nvars, self.order).exps
        mon = np.prod(h[None, :] ** exps, axis=1)
        return float(mon @ self.coeffs)

    def is_constant(self) -> bool:
        return not np.any(self.coeffs[1:])

    def same_shape(self, other: "Jet") -> bool:
        return self.nvars == other.nvars and self.order == other.order

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, coeffs={self.coeffs.tolist()})"

    # -- arithmetic
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if not self.same_shape(other):
                raise JetShapeError(
                    f"shape mismatch: ({self.nvars}, {self.order}) vs ({other.nvars}, {other.order})"
                )
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return jet_constant(float(other), self.nvars, self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet._raw(self.nvars, self.order, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet._raw(self.nvars, self.order, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet._raw(self.nvars, self.order, o.coeffs - self.coeffs)

    def __neg__(self):
        return Jet._raw(self.nvars, self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet._raw(self.nvars, self.order, self.coeffs * float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return jet_mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if other == 0:
                raise ZeroDivisionError("jet divided by zero")
            return Jet._raw(self.nvars, self.order, self.coeffs / float(other))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return jet_div(self, o)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return jet_div(o, self)

    def __pow__(self, p):
        return jet_pow(self, p)


# ---------------------------------------------------------------------------
# constructors


def jet_constant(value: float, nvars: int, order: int) -> Jet:
    arr = np.zeros(_size(nvars, order))
    arr[0] = value
    return Jet._raw(nvars, order, arr)


def jet_variable(i: int, base: float, nvars: int, order: int) -> Jet:
    """Jet of the coordinate function ``x_i`` expanded at ``x_i = base``."""
    if not 0 <= i < nvars:
        raise IndexError(f"variable index {i} out of range for nvars={nvars}")
    arr = np.zeros(_size(nvars, order))
    arr[0] = base
    if order >= 1:
        arr[1 + i] = 1.0
    return Jet._raw(nvars, order, arr)


# ---------------------------------------------------------------------------
# arithmetic


def _check(a: Jet, b: Jet) -> None:
    if not a.same_shape(b):
        raise JetShapeError(
            f"shape mismatch: ({a.nvars}, {a.order}) vs ({b.nvars}, {b.order})"
        )


def jet_add(a: Jet, b: Jet) -> Jet:
    _check(a, b)
    return a + b


def jet_sub(a: Jet, b: Jet) -> Jet:
    _check(a, b)
    return a - b


def jet_scale(a: Jet, s: float) -> Jet:
    return a * float(s)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated Cauchy product."""
    _check(a, b)
    if a.order == 0:
        return Jet._raw(a.nvars, 0, a.coeffs * b.coeffs)
    ia, ib, ic = _mul_table(a.nvars, a.order)
    out = np.bincount(ic, weights=a.coeffs[ia] * b.coeffs[ib], minlength=len(a.coeffs))
    return Jet._raw(a.nvars, a.order, out)


def jet_div(a: Jet, b: Jet) -> Jet:
    _check(a, b)
    if b.constant == 0.0:
        raise JetDomainError("division by a jet with zero constant term")
    if b.is_constant():
        return Jet._raw(a.nvars, a.order, a.coeffs / b.constant)
    return jet_mul(a, jet_compose_analytic("reciprocal", b))


def jet_pow(a: Jet, p) -> Jet:
    """``a ** p``; integer ``p`` uses repeated squaring, others the pow kernel."""
    if isinstance(p, Jet):
        if not p.is_constant():
            return jet_compose_analytic("exp", p * jet_compose_analytic("log", a))
        p = p.constant
    p = float(p)
    if p.is_integer() and abs(p) <= 64:
        k = int(p)
        if k < 0:
            return jet_div(jet_constant(1.0, a.nvars, a.order), jet_pow(a, -k))
        result = jet_constant(1.0, a.nvars, a.order)
        base = a
        while k:
            if k & 1:
                result = jet_mul(result, base)
            k >>= 1
            if k:
                base = jet_mul(base, base)
        return result
    return jet_compose_analytic(("pow", p), a)


def jet_truncate(a: Jet, order: int) -> Jet:
    if order > a.order:
        raise ValueError(f"cannot raise order {a.order} to {order}")
    n = _size(a.nvars, order)
    return Jet._raw(a.nvars, order, np.array(a.coeffs[:n]))


def jet_partial(a: Jet, i: int) -> Jet:
    """Formal partial derivative in variable ``i``; the order drops by one."""
    if a.order < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    if not 0 <= i < a.nvars:
        raise IndexError(f"variable index {i} out of range")
    s, d, w = _partial_table(a.nvars, a.order, i)
    out = np.zeros(_size(a.nvars, a.order - 1))
    out[d] = a.coeffs[s] * w
    return Jet._raw(a.nvars, a.order - 1, out)


def jet_compose(a: Jet, args: Sequence[Jet]) -> Jet:
    """Substitute jets ``args`` for the variables of the polynomial ``a``.

    The result has the shape of ``args``. Used to re-expand a series about a
    shifted base point (pass ``args[i] = jet_variable(i, h_i, ...)``).
    """
    if len(args) != a.nvars:
        raise JetShapeError(f"need {a.nvars} arguments, got {len(args)}")
    ref = args[0]
    for b in args[1:]:
        _check(ref, b)
    powers = []
    for b in args:
        row = [jet_constant(1.0, ref.nvars, ref.order)]
        for _ in range(a.order):
            row.append(jet_mul(row[-1], b))
        powers.append(row)
    acc = np.zeros(_size(ref.nvars, ref.order))
    for e, c in zip(_layout(a.nvars, a.order).exps, a.coeffs):
        if c == 0.0:
            continue
        term = None
        for v, k in enumerate(e):
            if k:
                term = powers[v][k] if term is None else jet_mul(term, powers[v][k])
        acc += c * (term.coeffs if term is not None else powers[0][0].coeffs)
    return Jet._raw(ref.nvars, ref.order, acc)


# ---------------------------------------------------------------------------
# univariate analytic kernels
#
# Each kernel maps (a0, d) to the Taylor coefficients c_0..c_d of the
# function about a0; composition then evaluates sum c_k (a - a0)^k by Horner.


def _binomial_series(p: float, a0: float, d: int) -> list[float]:
    out = [a0**p]
    for k in range(1, d + 1):
        out.append(out[-1] * (p - k + 1) / (k * a0))
    return out


def _k_sqrt(a0: float, d: int) -> list[float]:
    if a0 <= 0.0:
        raise JetDomainError(f"sqrt needs a positive constant term, got {a0!r}")
    return _binomial_series(0.5, a0, d)


def _k_exp(a0: float, d: int) -> list[float]:
    e = math.exp(a0)
    return [e / math.factorial(k) for k in range(d + 1)]


def _k_log(a0: float, d: int) -> list[float]:
    if a0 <= 0.0:
        raise JetDomainError(f"log needs a positive constant term, got {a0!r}")
    return [math.log(a0)] + [(-1.0) ** (k + 1) / (k * a0**k) for k in range(1, d + 1)]


def _k_sin(a0: float, d: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cyc = [s, c, -s, -c]
    return [cyc[k % 4] / math.factorial(k) for k in range(d + 1)]


def _k_cos(a0: float, d: int) -> list[float]:
    s, c = math.sin(a0), math.cos(a0)
    cyc = [c, -s, -c, s]
    return [cyc[k % 4] / math.factorial(k) for k in range(d + 1)]


def _k_tanh(a0: float, d: int) -> list[float]:
    # t' = 1 - t^2, solved coefficientwise
    t = [math.tanh(a0)]
    for k in range(d):
        sq = sum(t[j] * t[k - j] for j in range(k + 1))
        t.append(((1.0 if k == 0 else 0.0) - sq) / (k + 1))
    return t


def _k_reciprocal(a0: float, d: int) -> list[float]:
    if a0 == 0.0:
        raise JetDomainError("reciprocal of a jet with zero constant term")
    return [(-1.0) ** k / a0 ** (k + 1) for k in range(d + 1)]


def _k_pow(p: float) -> Callable[[float, int], list[float]]:
    def kernel(a0: float, d: int) -> list[float]:
        if a0 <= 0.0:
            raise JetDomainError(f"pow with exponent {p} needs a positive base, got {a0!r}")
        return _binomial_series(p, a0, d)

    return kernel


KERNELS: dict[str, Callable[[float, int], list[float]]] = {
    "sqrt": _k_sqrt,
    "exp": _k_exp,
    "log": _k_log,
    "sin": _k_sin,
    "cos": _k_cos,
    "tanh": _k_tanh,
    "reciprocal": _k_reciprocal,
}


def jet_compose_analytic(fn, a: Jet) -> Jet:
    """Compose a univariate analytic kernel with a jet.

    ``fn`` is a kernel name from :data:`KERNELS`, a tuple ``("pow", p)``, or
    a callable ``(a0, d) -> [c_0, ..., c_d]`` giving Taylor coefficients.
    """
    if isinstance(fn, tuple) and fn[0] == "pow":
        kernel = _k_pow(float(fn[1]))
    elif isinstance(fn, str):
        try:
            kernel = KERNELS[fn]
        except KeyError:
            raise ValueError(f"unknown analytic kernel {fn!r}") from None
    else:
        kernel = fn
    a0 = a.constant
    cs = kernel(a0, a.order)
    if a.order == 0:
        return jet_constant(cs[0], a.nvars, 0)
    h = a - a0
    r = jet_constant(cs[-1], a.nvars, a.order)
    for c in reversed(cs[:-1]):
        r = jet_mul(r, h) + c
    return r
