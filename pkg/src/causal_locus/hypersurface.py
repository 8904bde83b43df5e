"""Fundamental data of graph hypersurfaces ``F(x) = (f(x), x)``.

Everything here is pointwise: first fundamental matrix ``S``, its
determinant ``B``, the cofactor matrix, the normal ``nu``, the normalised
second fundamental form ``h``, ``A = sum cof(S)_ij h_ij`` and the mean
curvature quantities derived from ``A`` and ``B``.

Two code paths exist. The general one works in any chart exposing
``metric_at``/``christoffels``; the Minkowski fast path uses the closed forms
``B = 1 - |grad f|^2``, ``cof S = B I + grad f grad f^T``,
``nu = -(1, grad f)`` and ``h = Hess f``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .expr import Expr, ExprEvalError, compile_expr, domain_vars, parse
from .jets import Jet, JetDomainError, jet_compose, jet_partial, jet_truncate, jet_variable
from .metric import AffineChart, christoffels_from, is_admissible_at, minkowski_as_generic

__all__ = [
    "HeightFunction",
    "ExprHeight",
    "SeriesHeight",
    "AffineHeight",
    "GraphSurface",
    "CausalClass",
    "PointReport",
    "SurfaceError",
    "PreconditionError",
    "graph",
    "point_report",
    "b_data",
    "classify",
    "minkowski_ab_jets",
    "minkowski_consistency",
    "admissibility_residual",
    "normalize_at_lightlike",
    "lemma_2_3_check",
    "DEFAULT_TOL_GRAD",
]

DEFAULT_TOL_GRAD = 1e-8


class SurfaceError(ValueError):
    """Height function or metric could not be evaluated."""


class PreconditionError(ValueError):
    """An operation's stated precondition does not hold."""


# ---------------------------------------------------------------------------
# height functions


class HeightFunction:
    """Protocol: ``n``, ``compose(args)`` and helpers built on it."""

    n: int

    def compose(self, args: Sequence[Jet]) -> Jet:  # pragma: no cover - abstract
        raise NotImplementedError

    def jet(self, p: Sequence[float], order: int) -> Jet:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise SurfaceError(f"domain point must have {self.n} coordinates, got {p.tolist()}")
        return self.compose([jet_variable(i, float(p[i]), self.n, order) for i in range(self.n)])

    def value(self, p: Sequence[float]) -> float:
        return self.jet(p, 0).constant


@dataclass(frozen=True)
class ExprHeight(HeightFunction):
    expr: Expr
    n: int
    text: str = ""

    @classmethod
    def from_text(cls, text: str, n: int) -> "ExprHeight":
        return cls(parse(text, domain_vars(n)), n, text)

    def compose(self, args):
        env = {f"x{i + 1}": a for i, a in enumerate(args)}
        if self.n == 2:
            env["x"], env["y"] = args[0], args[1]
        try:
            out = compile_expr(self.expr)(env)
        except (ExprEvalError, JetDomainError, ZeroDivisionError) as exc:
            raise SurfaceError(str(exc)) from exc
        if not isinstance(out, Jet):
            out = args[0] * 0.0 + float(out)
        return out

    def value(self, p):
        env = {f"x{i + 1}": float(v) for i, v in enumerate(p)}
        if self.n == 2:
            env["x"], env["y"] = env["x1"], env["x2"]
        try:
            return float(compile_expr(self.expr)(env))
        except (ExprEvalError, JetDomainError, ZeroDivisionError) as exc:
            raise SurfaceError(str(exc)) from exc


@dataclass(frozen=True)
class SeriesHeight(HeightFunction):
    """Truncated power series about the origin, re-expanded on demand."""

    series: Jet

    @property
    def n(self) -> int:
        return self.series.nvars

    def compose(self, args):
        return jet_compose(self.series, args)

    def value(self, p):
        return self.series.evaluate(p)


@dataclass(frozen=True)
class AffineHeight(HeightFunction):
    """``f_new(x) = parent(origin + R^T x) - shift``."""

    parent: HeightFunction
    origin: np.ndarray
    R: np.ndarray
    shift: float

    @property
    def n(self) -> int:
        return self.parent.n

    def compose(self, args):
        n = self.n
        moved = []
        for i in range(n):
            acc = args[0] * 0.0 + float(self.origin[i])
            for j in range(n):
                if self.R[j, i] != 0.0:
                    acc = acc + args[j] * float(self.R[j, i])
            moved.append(acc)
        return self.parent.compose(moved) - self.shift


@dataclass(frozen=True)
class GraphSurface:
    height: HeightFunction
    ambient: object  # MetricChart-like

    def __post_init__(self):
        if self.ambient.dim != self.height.n + 1:
            raise ValueError(
                f"ambient dimension {self.ambient.dim} does not match graph dimension {self.height.n}"
            )

    @property
    def n(self) -> int:
        return self.height.n

    def point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.concatenate([[self.height.value(p)], p])

    def tangents(self, p) -> np.ndarray:
        """Rows ``dF(d/dx_i)`` in ambient components."""
        fj = self.height.jet(p, 1)
        mu = np.zeros((self.n, self.n + 1))
        mu[:, 0] = fj.gradient()
        mu[:, 1:] = np.eye(self.n)
        return mu


def graph(f: str | Expr | HeightFunction, n: int, ambient=None) -> GraphSurface:
    """Convenience constructor; ``ambient`` defaults to Minkowski."""
    from .metric import minkowski

    if isinstance(f, str):
        h = ExprHeight.from_text(f, n)
    elif isinstance(f, HeightFunction):
        h = f
    else:
        h = ExprHeight(f, n)
    return GraphSurface(h, ambient if ambient is not None else minkowski(n))


# ---------------------------------------------------------------------------
# classification


class CausalClass(str, enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    LIGHTLIKE_NONDEGENERATE = "lightlike_nondegenerate"
    LIGHTLIKE_DEGENERATE = "lightlike_degenerate"

    @property
    def is_lightlike(self) -> bool:
        return self in (CausalClass.LIGHTLIKE_DEGENERATE, CausalClass.LIGHTLIKE_NONDEGENERATE)


def classify(B: float, gradB: np.ndarray, tol_B: float, tol_grad: float) -> CausalClass:
    if B > tol_B:
        return CausalClass.SPACELIKE
    if B < -tol_B:
        return CausalClass.TIMELIKE
    if float(np.linalg.norm(gradB)) <= tol_grad:
        return CausalClass.LIGHTLIKE_DEGENERATE
    return CausalClass.LIGHTLIKE_NONDEGENERATE


@dataclass
class PointReport:
    p: np.ndarray
    S: np.ndarray
    B: float
    gradB: np.ndarray
    Scof: np.ndarray
    nu: np.ndarray
    h: np.ndarray
    A: float
    H: Optional[float]
    Hhat: Optional[float]
    Hvec: Optional[np.ndarray]
    omegaH: Optional[float]
    theta: float
    cls: CausalClass
    tol_B: float
    tol_grad: float
    path: str = "general"

    def as_dict(self) -> dict:
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, CausalClass):
                return v.value
            return v

        return {k: conv(v) for k, v in self.__dict__.items()}


def _cofactor(S: np.ndarray) -> np.ndarray:
    n = S.shape[0]
    if n == 1:
        return np.ones((1, 1))
    C = np.empty_like(S)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(S, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * _det(minor)
    return C


def _det(M: np.ndarray) -> float:
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0])
    if n == 2:
        return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if n == 3:
        return float(
            M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
            - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
            + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
        )
    return float(np.linalg.det(M))


def _normal(mu_low: np.ndarray) -> np.ndarray:
    """Normal from the determinant expansion, oriented so Minkowski gives -(1, grad f)."""
    n = mu_low.shape[0]
    nu = np.empty(n + 1)
    for j in range(n + 1):
        nu[j] = (-1) ** (j + 1) * _det(np.delete(mu_low, j, axis=1))
    return nu


def _f_derivs(F: GraphSurface, p, order: int = 2):
    try:
        fj = F.height.jet(p, order)
    except (ExprEvalError, JetDomainError) as exc:
        raise SurfaceError(str(exc)) from exc
    if not np.all(np.isfinite(fj.coeffs)):
        raise SurfaceError(f"height function is not finite at {np.asarray(p).tolist()}")
    return fj


def _report(F, p, f0, df, hf, S, B, gradB, Scof, nu, h, tol_B, tol_grad, path) -> PointReport:
    n = F.n
    A = float(np.sum(Scof * h))
    if tol_B is None:
        tol_B = 1e-10 * (1.0 + float(np.max(np.abs(S))))
    cls = classify(B, gradB, tol_B, tol_grad)
    if abs(B) > tol_B:
        H = A / (n * abs(B) ** 1.5)
        Hhat = math.copysign(1.0, B) * H
        Hvec = A / (n * B * B) * nu
        omegaH = A / (n * B)
    else:
        H = Hhat = Hvec = omegaH = None
    return PointReport(
        np.asarray(p, dtype=float), S, float(B), gradB, Scof, nu, h, A, H, Hhat, Hvec, omegaH,
        math.sqrt(abs(B)), cls, float(tol_B), float(tol_grad), path,
    )


def point_report(
    F: GraphSurface,
    p: Sequence[float],
    tol_B: float | None = None,
    tol_grad: float = DEFAULT_TOL_GRAD,
    path: str = "auto",
) -> PointReport:
    """All first/second-order data of ``F`` at the domain point ``p``.

    ``path`` is ``"auto"`` (Minkowski fast path when the ambient allows it),
    ``"general"`` or ``"minkowski"``.
    """
    p = np.asarray(p, dtype=float)
    n = F.n
    fj = _f_derivs(F, p, 2)
    f0, df, hf = fj.constant, fj.gradient(), fj.hessian()
    use_fast = path == "minkowski" or (path == "auto" and F.ambient.is_minkowski)
    if use_fast:
        if not F.ambient.is_minkowski:
            raise PreconditionError("Minkowski fast path requested for a non-Minkowski ambient")
        S = np.eye(n) - np.outer(df, df)
        B = 1.0 - float(df @ df)
        gradB = -2.0 * hf @ df
        Scof = B * np.eye(n) + np.outer(df, df)
        nu = -np.concatenate([[1.0], df])
        return _report(F, p, f0, df, hf, S, B, gradB, Scof, nu, hf.copy(), tol_B, tol_grad, "minkowski")

    X = np.concatenate([[f0], p])
    g, dg = F.ambient.metric_at(X)
    gam = christoffels_from(g, dg)
    mu = np.zeros((n, n + 1))
    mu[:, 0] = df
    mu[:, 1:] = np.eye(n)
    S = mu @ g @ mu.T
    S = 0.5 * (S + S.T)  # symmetric up to rounding otherwise
    B = _det(S)
    Scof = _cofactor(S)
    # dS/dx_k via the chain rule: metric varies along F, tangents vary through f
    gradB = np.empty(n)
    for k in range(n):
        dgk = np.tensordot(mu[k], dg, axes=(0, 0))  # d_k (g o F)
        dmu = np.zeros((n, n + 1))
        dmu[:, 0] = hf[:, k]
        dS = mu @ dgk @ mu.T + dmu @ g @ mu.T + mu @ g @ dmu.T
        gradB[k] = float(np.sum(Scof * dS))
    nu = _normal(mu @ g)
    h = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            acc = np.einsum("cab,a,b->c", gam, mu[i], mu[j])
            acc[0] += hf[i, j]
            h[i, j] = float(acc @ g @ nu)
    return _report(F, p, f0, df, hf, S, B, gradB, Scof, nu, h, tol_B, tol_grad, "general")


def b_data(F: GraphSurface, p, fd_step: float = 1e-5) -> tuple[float, np.ndarray, np.ndarray]:
    """``B``, its gradient and Hessian at ``p``.

    Minkowski: exact via order-3 jets. Otherwise the Hessian comes from
    central differences of the (exact) gradient.
    """
    p = np.asarray(p, dtype=float)
    n = F.n
    if F.ambient.is_minkowski:
        fj = _f_derivs(F, p, 3)
        grads = [jet_partial(fj, i) for i in range(n)]
        Bj = 1.0 - sum(gi * gi for gi in grads)
        return Bj.constant, Bj.gradient(), Bj.hessian()
    r = point_report(F, p)
    H = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = fd_step
        gp = point_report(F, p + e).gradB
        gm = point_report(F, p - e).gradB
        H[:, k] = (gp - gm) / (2 * fd_step)
    return r.B, r.gradB, 0.5 * (H + H.T)


def minkowski_ab_jets(fj: Jet) -> tuple[Jet, Jet]:
    """``(A, B)`` of a Minkowski graph as jets of orders ``d-2`` and ``d-1``."""
    n, d = fj.nvars, fj.order
    if d < 2:
        raise ValueError("need a height jet of order >= 2")
    grads = [jet_partial(fj, i) for i in range(n)]
    B = 1.0 - sum(gi * gi for gi in grads)
    hess = [[jet_partial(grads[i], j) for j in range(n)] for i in range(n)]
    B2 = jet_truncate(B, d - 2)
    g2 = [jet_truncate(gi, d - 2) for gi in grads]
    A = None
    for i in range(n):
        for j in range(n):
            coef = g2[i] * g2[j]
            if i == j:
                coef = coef + B2
            term = coef * hess[i][j]
            A = term if A is None else A + term
    return A, B


# ---------------------------------------------------------------------------
# cross-checks and class membership


@dataclass
class ConsistencyResiduals:
    dB: float
    dA: float
    dnu: float
    dgradB: float
    fast: PointReport
    general: PointReport

    def max(self) -> float:
        return max(self.dB, self.dA, self.dnu, self.dgradB)


def minkowski_consistency(F: GraphSurface, p) -> ConsistencyResiduals:
    """Evaluate ``p`` through the fast path and the generic-metric path."""
    if not F.ambient.is_minkowski:
        raise PreconditionError("ambient must be the builtin Minkowski chart")
    fast = point_report(F, p, path="minkowski")
    G = GraphSurface(F.height, minkowski_as_generic(F.n))
    gen = point_report(G, p, path="general")
    return ConsistencyResiduals(
        abs(fast.B - gen.B),
        abs(fast.A - gen.A),
        float(np.max(np.abs(fast.nu - gen.nu))),
        float(np.max(np.abs(fast.gradB - gen.gradB))),
        fast,
        gen,
    )


def _phi_callable(phi, n: int) -> Callable[[np.ndarray], float]:
    if phi is None:
        return lambda p: 0.0
    if callable(phi):
        return phi
    if isinstance(phi, (int, float)):
        return lambda p, c=float(phi): c
    h = ExprHeight.from_text(phi, n) if isinstance(phi, str) else ExprHeight(phi, n)
    return h.value


def admissibility_residual(F: GraphSurface, phi, alpha: float, grid: Sequence[Sequence[float]]) -> float:
    """``max |A - phi * B^(1+alpha)|`` over ``grid``.

    For non-integer ``alpha`` the power is taken of ``|B|``. ``phi`` may be an
    expression, text, a number, ``None`` (zero) or a callable on points.
    """
    phi_fn = _phi_callable(phi, F.n)
    integer = float(alpha).is_integer()
    worst = 0.0
    for p in grid:
        r = point_report(F, p)
        Bpow = r.B ** (1 + int(alpha)) if integer else abs(r.B) ** (1.0 + alpha)
        worst = max(worst, abs(r.A - phi_fn(np.asarray(p, dtype=float)) * Bpow))
    return worst


# ---------------------------------------------------------------------------
# normalisation at a light-like point


def _rotation_to_last_axis(u: np.ndarray) -> np.ndarray:
    n = len(u)
    u = u / np.linalg.norm(u)
    e = np.zeros(n)
    e[-1] = 1.0
    if np.allclose(u, e, atol=1e-15, rtol=0):
        return np.eye(n)
    comp = null_space(u[None, :]).T  # (n-1, n) orthonormal complement
    R = np.vstack([comp, u])
    if np.linalg.det(R) < 0:
        R[0] = -R[0]
    return R


def normalize_at_lightlike(
    F: GraphSurface, o: Sequence[float], tol_B: float = 1e-9, tol_admissible: float = 1e-9
) -> GraphSurface:
    """Move ``o`` to the origin and rotate so that ``grad f(o) = (0, ..., 0, 1)``."""
    o = np.asarray(o, dtype=float)
    r = point_report(F, o)
    if not r.cls.is_lightlike and abs(r.B) > tol_B:
        raise PreconditionError(f"point {o.tolist()} is not light-like (B = {r.B:.3e})")
    fj = F.height.jet(o, 1)
    grad = fj.gradient()
    if np.linalg.norm(grad) == 0.0:
        raise PreconditionError(
            "inconsistent input: grad f vanishes, so B = 1 at this point in an admissible chart"
        )
    n = F.n
    if not F.ambient.is_minkowski:
        rep = is_admissible_at(F.ambient, F.point(o), tol_admissible)
        if not rep.admissible:
            raise PreconditionError(f"ambient chart is not admissible at F(o): {rep.as_dict()}")
    R = _rotation_to_last_axis(grad)
    if np.allclose(R, np.eye(n)) and np.all(o == 0.0) and fj.constant == 0.0:
        return F
    height = AffineHeight(F.height, o.copy(), R, fj.constant)
    L = np.zeros((n + 1, n + 1))
    L[0, 0] = 1.0
    L[1:, 1:] = R.T
    offset = np.concatenate([[fj.constant], o])
    ambient = AffineChart(F.ambient, offset, L)
    return GraphSurface(height, ambient)


@dataclass
class Lemma23Report:
    Bn: float  # |(B)_{x_n}(o)|
    fnn: float  # |f_{x_n x_n}(o)|
    identity: list  # |(B)_{x_j}(o) + 2 f_{x_n x_j}(o)|, j < n
    mixed: list  # f_{x_n x_j}(o), j < n
    degenerate: bool
    tol: float

    def max_residual(self) -> float:
        return max([self.Bn, self.fnn] + list(self.identity))

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def lemma_2_3_check(F: GraphSurface, o: Sequence[float] | None = None, tol: float = 1e-10) -> Lemma23Report:
    """Residuals of the light-like-point identities at a normalised point.

    ``F`` must already be normalised at ``o`` (``f(o) = 0``, ``grad f(o) = e_n``).
    """
    n = F.n
    o = np.zeros(n) if o is None else np.asarray(o, dtype=float)
    fj = F.height.jet(o, 2)
    grad = fj.gradient()
    target = np.zeros(n)
    target[-1] = 1.0
    if np.max(np.abs(grad - target)) > 1e-9:
        raise PreconditionError(f"surface is not normalised at o (grad f = {grad.tolist()})")
    r = point_report(F, o, tol_grad=tol)
    hf = fj.hessian()
    mixed = [float(hf[-1, j]) for j in range(n - 1)]
    ident = [abs(float(r.gradB[j]) + 2.0 * hf[-1, j]) for j in range(n - 1)]
    return Lemma23Report(
        abs(float(r.gradB[-1])), abs(float(hf[-1, -1])), ident, mixed,
        bool(all(abs(m) <= tol for m in mixed)), tol,
    )
