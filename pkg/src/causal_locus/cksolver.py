"""Truncated power-series construction of graph hypersurfaces in Minkowski space.

Both builders solve a PDE in normal form with respect to ``x_n`` by slices:
writing ``f = sum_k s_k(x') x_n^k`` with ``x' = (x_1, ..., x_{n-1})``, the
``x_n^k`` coefficient of the equation is linear in the first unknown slice
and involves only slices that are already known.

* :func:`build_lightlike` solves ``f_{x_n} = sqrt(1 - sum_{i<n} f_{x_i}^2)``
  with ``f(x', 0) = lambda(x')``, which makes ``B = 0`` identically.
* :func:`build_admissible` solves ``A - phi * B^(1+alpha) = 0``. The
  coefficient of ``f_{x_n x_n}`` in ``A`` is ``1 - Q`` with
  ``Q = sum_{k<n} f_{x_k}^2``, so
  ``(1 - Q) f_{x_n x_n} = phi B^(1+alpha) - sum_{(i,j) != (n,n)} cof(S)_ij f_ij``,
  with data ``f(x', 0) = eta_0`` and ``f_{x_n}(x', 0) = 1 + eta_1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .expr import Expr, compile_expr, domain_vars, parse, to_text, variables
from .hypersurface import GraphSurface, SeriesHeight, minkowski_ab_jets
from .jets import (
    Jet,
    JetDomainError,
    jet_compose_analytic,
    jet_constant,
    jet_partial,
    jet_truncate,
    jet_variable,
    multi_indices,
)
from .metric import minkowski

__all__ = [
    "SeriesSurface",
    "SeriesResidual",
    "SolverError",
    "build_lightlike",
    "build_admissible",
    "series_residual",
    "recover_data",
    "axis_coefficients",
    "expr_jet",
    "dump_series",
    "load_series",
    "SERIES_FORMAT",
]

SERIES_FORMAT = "causal-locus-series"


class SolverError(ValueError):
    """Builder input violates a precondition or hits a singular step."""


@dataclass(frozen=True)
class SeriesSurface:
    n: int
    order: int
    f: Jet
    provenance: Mapping = field(default_factory=dict)

    def graph(self) -> GraphSurface:
        return GraphSurface(SeriesHeight(self.f), minkowski(self.n))


# ---------------------------------------------------------------------------
# slice helpers


def _exps(nvars: int, order: int) -> np.ndarray:
    return np.array(multi_indices(nvars, order), dtype=int).reshape(-1, nvars)


def _slice(a: Jet, k: int) -> Jet:
    """The ``x_n^k`` coefficient of ``a`` as an ``x_n``-free jet of the same shape."""
    ex = _exps(a.nvars, a.order)
    out = {}
    for e, c in zip(ex, a.coeffs):
        if e[-1] == k and c != 0.0:
            e2 = tuple(e[:-1]) + (0,)
            out[e2] = float(c)
    return Jet.from_dict(a.nvars, a.order, out)


def _shift(a: Jet, k: int, order: int) -> Jet:
    """``a * x_n^k`` as a jet of ``order`` (``a`` must be free of ``x_n``)."""
    out = {}
    for e, c in a.as_dict().items():
        e2 = e[:-1] + (e[-1] + k,)
        out[e2] = c
    return Jet.from_dict(a.nvars, order, out)


def _raise_order(a: Jet, order: int) -> Jet:
    return Jet.from_dict(a.nvars, order, a.as_dict())


def expr_jet(e: Expr | str | float, n: int, order: int, allowed: list[str] | None = None) -> Jet:
    """Jet of an expression in the domain variables at the origin."""
    if isinstance(e, (int, float)):
        return jet_constant(float(e), n, order)
    if isinstance(e, str):
        e = parse(e, allowed if allowed is not None else domain_vars(n))
    args = [jet_variable(i, 0.0, n, order) for i in range(n)]
    env = {f"x{i + 1}": a for i, a in enumerate(args)}
    if n == 2:
        env["x"], env["y"] = args
    out = compile_expr(e)(env)
    if not isinstance(out, Jet):
        out = jet_constant(float(out), n, order)
    return out


def _transverse_jet(e, n: int, order: int, name: str) -> tuple[Jet, str]:
    """Jet of a datum that may depend on ``x_1..x_{n-1}`` only."""
    allowed = [f"x{i}" for i in range(1, n)]
    if n == 2:
        allowed.append("x")
    if isinstance(e, (int, float)):
        return jet_constant(float(e), n, order), repr(float(e))
    if isinstance(e, str):
        try:
            e = parse(e, allowed)
        except Exception as exc:
            raise type(exc)(f"{name}: {exc}") from exc
    else:
        bad = variables(e) - set(allowed)
        if bad:
            raise SolverError(f"{name} may only depend on {allowed}, found {sorted(bad)}")
    return expr_jet(e, n, order), to_text(e)


# ---------------------------------------------------------------------------
# builders


def build_lightlike(lam, n: int, order: int = 10) -> SeriesSurface:
    """Light-like graph with ``f(x', 0) = lambda(x')`` to total degree ``order``."""
    if n < 2:
        raise SolverError("n must be at least 2")
    if order < 2:
        raise SolverError("order must be at least 2")
    lam_j, lam_text = _transverse_jet(lam, n, order, "lambda")
    grad0 = lam_j.gradient()[:-1]
    if float(grad0 @ grad0) >= 1.0:
        raise JetDomainError(f"sqrt domain violated: |grad lambda(0)|^2 = {float(grad0 @ grad0):.6g} >= 1")
    if abs(lam_j.constant) > 0.0 or np.any(grad0 != 0.0):
        raise SolverError("lambda must vanish to second order at the origin (lambda(0) = 0, grad lambda(0) = 0)")
    f = lam_j
    for k in range(order):
        q = None
        for i in range(n - 1):
            fi = _partial_full(f, i, order - 1)
            q = fi * fi if q is None else q + fi * fi
        rhs = jet_compose_analytic("sqrt", 1.0 - q)
        s_next = _slice(rhs, k) * (1.0 / (k + 1))
        f = f + _shift(_cut(s_next, order - k - 1), k + 1, order)
    prov = {"builder": "lightlike", "lambda": lam_text, "n": n, "order": order}
    return SeriesSurface(n, order, f, prov)


def _cut(a: Jet, max_degree: int) -> Jet:
    """Drop terms of total degree above ``max_degree`` (keeping the jet shape)."""
    ex = _exps(a.nvars, a.order)
    arr = np.where(ex.sum(axis=1) <= max_degree, a.coeffs, 0.0)
    return Jet(a.nvars, a.order, arr)


def _partial_full(a: Jet, i: int, order: int) -> Jet:
    return jet_truncate(jet_partial(a, i), order)


def build_admissible(eta0, eta1, phi, alpha: int, n: int, order: int = 12) -> SeriesSurface:
    """Graph with ``A - phi B^(1+alpha) = 0``, ``f(x',0) = eta0``, ``f_{x_n}(x',0) = 1 + eta1``.

    ``alpha`` must be a non-negative integer; ``phi`` may depend on all of
    ``x_1..x_n``.
    """
    if n < 2:
        raise SolverError("n must be at least 2")
    if order < 2:
        raise SolverError("order must be at least 2")
    if isinstance(alpha, bool) or not float(alpha).is_integer() or alpha < 0:
        raise SolverError(f"alpha must be a non-negative integer, got {alpha!r}")
    alpha = int(alpha)
    e0, e0_text = _transverse_jet(eta0, n, order, "eta0")
    e1, e1_text = _transverse_jet(eta1, n, order, "eta1")
    if e0.constant != 0.0 or np.any(e0.gradient() != 0.0):
        raise SolverError("eta0 must vanish to second order at the origin")
    if e1.constant != 0.0:
        raise SolverError("eta1 must vanish at the origin")
    if phi is None:
        phi = 0.0
    phi_j = phi if isinstance(phi, Jet) else expr_jet(phi, n, order - 2)
    phi_text = None if isinstance(phi, Jet) else (to_text(phi) if isinstance(phi, Expr) else str(phi))
    if phi_j.order != order - 2:
        phi_j = jet_truncate(phi_j, order - 2) if phi_j.order > order - 2 else _raise_order(phi_j, order - 2)

    xn = jet_variable(n - 1, 0.0, n, order)
    f = e0 + _cut(e1 + 1.0, order - 1) * xn
    # 1 - Q on the initial slice: the coefficient of the unknown slice
    lead = None
    for i in range(n - 1):
        gi = _partial_full(e0, i, order - 2)
        lead = gi * gi if lead is None else lead + gi * gi
    lead = 1.0 - lead if lead is not None else jet_constant(1.0, n, order - 2)
    if abs(lead.constant) < 1e-14:
        raise SolverError("1 - Q vanishes at the origin")
    for k in range(order - 1):
        A, B = minkowski_ab_jets(f)
        Bp = jet_truncate(B, order - 2) ** (1 + alpha)
        R = phi_j * Bp - A
        r_k = _slice(R, k)
        try:
            s_new = r_k / lead
        except JetDomainError as exc:
            raise SolverError(f"division by vanishing 1 - Q: {exc}") from exc
        s_new = s_new * (1.0 / ((k + 2) * (k + 1)))
        f = f + _shift(_cut(s_new, order - k - 2), k + 2, order)
    prov = {
        "builder": "admissible",
        "eta0": e0_text,
        "eta1": e1_text,
        "phi": phi_text,
        "alpha": alpha,
        "n": n,
        "order": order,
    }
    return SeriesSurface(n, order, f, prov)


# ---------------------------------------------------------------------------
# residuals and read-back


@dataclass
class SeriesResidual:
    target: str
    max_abs: float
    valid_order: int
    residual: Jet
    scale: float = 1.0  # largest coefficient among the terms that cancel

    @property
    def relative(self) -> float:
        """``max_abs`` divided by ``max(1, scale)``; the roundoff-aware measure."""
        return self.max_abs / max(1.0, self.scale)

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "max_abs": self.max_abs,
            "relative": self.relative,
            "scale": self.scale,
            "valid_order": self.valid_order,
        }


def series_residual(s: SeriesSurface, phi=None, alpha: int = 0, target: str = "auto") -> SeriesResidual:
    """Largest coefficient of the residual jet up to its valid order.

    ``target`` is ``"lightlike"`` (``B``), ``"admissible"``
    (``A - phi B^(1+alpha)``) or ``"auto"`` (from the provenance).
    """
    if target == "auto":
        target = "lightlike" if s.provenance.get("builder") == "lightlike" else "admissible"
    A, B = minkowski_ab_jets(s.f)
    if target == "lightlike":
        Q = None
        for i in range(s.n):
            gi = _partial_full(s.f, i, B.order)
            Q = gi * gi if Q is None else Q + gi * gi
        return SeriesResidual(target, float(np.max(np.abs(B.coeffs))), B.order, B, float(np.max(np.abs(Q.coeffs))))
    if target != "admissible":
        raise ValueError(f"unknown residual target {target!r}")
    if phi is None:
        R = A
        scale = float(np.max(np.abs(A.coeffs)))
    else:
        phi_j = phi if isinstance(phi, Jet) else expr_jet(phi, s.n, A.order)
        if phi_j.order > A.order:
            phi_j = jet_truncate(phi_j, A.order)
        rhs = phi_j * jet_truncate(B, A.order) ** (1 + int(alpha))
        R = A - rhs
        scale = float(max(np.max(np.abs(A.coeffs)), np.max(np.abs(rhs.coeffs))))
    return SeriesResidual(target, float(np.max(np.abs(R.coeffs))), R.order, R, scale)


def recover_data(s: SeriesSurface) -> tuple[Jet, Jet]:
    """``(f(x', 0), f_{x_n}(x', 0) - 1)`` read back from the series."""
    eta0 = _slice(s.f, 0)
    eta1 = _slice(s.f, 1) - 1.0
    return eta0, jet_truncate(eta1, s.order - 1)


def axis_coefficients(s: SeriesSurface) -> np.ndarray:
    """Coefficients of ``x_n^k``, ``k = 0..order``, of ``f(0, ..., 0, x_n)``."""
    out = np.zeros(s.order + 1)
    for k in range(s.order + 1):
        e = [0] * s.n
        e[-1] = k
        out[k] = s.f.coeff(e)
    return out


# ---------------------------------------------------------------------------
# serialisation


def dump_series(s: SeriesSurface) -> str:
    """JSON text with hex-float coefficients (bit-exact round trip)."""
    doc = {
        "format": SERIES_FORMAT,
        "version": 1,
        "n": s.n,
        "order": s.order,
        "coeffs": [float(c).hex() for c in s.f.coeffs],
        "provenance": dict(s.provenance),
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def load_series(text: str) -> SeriesSurface:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SolverError(f"series file is not valid JSON: {exc}") from exc
    if doc.get("format") != SERIES_FORMAT:
        raise SolverError("not a series file")
    if doc.get("version") != 1:
        raise SolverError(f"unsupported series file version {doc.get('version')!r}")
    n, order = int(doc["n"]), int(doc["order"])
    coeffs = [float.fromhex(c) for c in doc["coeffs"]]
    return SeriesSurface(n, order, Jet(n, order, coeffs), doc.get("provenance", {}))
