"""Lorentzian metrics in a single coordinate chart.

A chart object exposes ``dim``, ``is_minkowski``, ``metric_at(p)`` returning
``(g, dg)`` with ``dg[k, i, j] = d g_ij / d x_k``, and ``christoffels(p)``.
:class:`MetricChart` is the expression-backed implementation; other modules
provide duck-typed charts (affine reparametrisations, Fermi pull-backs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .expr import Expr, ExprEvalError, Num, ambient_vars, compile_expr, parse
from .jets import Jet, jet_variable

__all__ = [
    "MetricError",
    "MetricSignatureError",
    "MetricChart",
    "AffineChart",
    "AdmissibilityReport",
    "minkowski",
    "minkowski_as_generic",
    "perturbed_metric",
    "christoffels_from",
    "check_signature",
    "metric_at",
    "christoffels",
    "is_admissible_at",
]


class MetricError(ValueError):
    """Metric could not be evaluated at the requested point."""


class MetricSignatureError(MetricError):
    """Component matrix is singular or not of signature (-, +, ..., +)."""


def check_signature(g: np.ndarray, rel_tol: float = 1e-12) -> None:
    w = np.linalg.eigvalsh(g)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.any(np.abs(w) <= rel_tol * scale):
        raise MetricSignatureError(f"metric is degenerate (eigenvalues {w.tolist()})")
    neg = int(np.sum(w < 0))
    if neg != 1:
        raise MetricSignatureError(
            f"metric has {neg} negative eigenvalues, expected exactly 1 ({w.tolist()})"
        )


def christoffels_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[c, a, b]`` from components and first derivatives.

    ``Gamma^c_ab = 1/2 g^cd (d_a g_db + d_b g_da - d_d g_ab)``
    """
    # lowered[d, a, b] = d_a g_db + d_b g_da - d_d g_ab
    lowered = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    dim = g.shape[0]
    try:
        sol = np.linalg.solve(g, lowered.reshape(dim, dim * dim))
    except np.linalg.LinAlgError:
        raise MetricSignatureError("singular metric matrix") from None
    gam = 0.5 * sol.reshape(dim, dim, dim)
    # symmetric in the lower pair by construction; make it bit-exact
    return 0.5 * (gam + np.transpose(gam, (0, 2, 1)))


@dataclass(frozen=True)
class MetricChart:
    """Metric ``g = sum g_ij dx_i dx_j`` given by expressions in ``x0..xn``.

    ``components`` maps index pairs ``(i, j)`` with ``i <= j`` to expressions;
    missing pairs default to the Minkowski value. Symmetry is structural.
    """

    dim: int
    components: tuple = field(repr=False)  # tuple of ((i, j), Expr) with i <= j
    kind: str = "generic"  # "minkowski" | "generic"
    name: str = ""
    check: bool = True

    @property
    def is_minkowski(self) -> bool:
        return self.kind == "minkowski"

    @property
    def n(self) -> int:
        return self.dim - 1

    def component(self, i: int, j: int) -> Expr:
        if i > j:
            i, j = j, i
        for key, e in self.components:
            if key == (i, j):
                return e
        return Num(-1.0 if i == j == 0 else (1.0 if i == j else 0.0))

    @classmethod
    def from_strings(cls, dim: int, table: Mapping[str, str], name: str = "") -> "MetricChart":
        """Build from keys ``"g00"``, ``"g01"``, ... (either order of indices)."""
        allowed = ambient_vars(dim - 1)
        comps: dict = {}
        for key, text in table.items():
            if len(key) != 3 or key[0] != "g" or not key[1:].isdigit():
                raise ValueError(f"bad metric component key {key!r}")
            i, j = int(key[1]), int(key[2])
            if not (0 <= i < dim and 0 <= j < dim):
                raise ValueError(f"metric component {key!r} out of range for dim {dim}")
            pair = (min(i, j), max(i, j))
            e = parse(str(text), allowed)
            if pair in comps and comps[pair] != e:
                raise ValueError(f"conflicting values for g{pair[0]}{pair[1]} and its transpose")
            comps[pair] = e
        return cls(dim, tuple(sorted(comps.items())), "generic", name)

    # -- evaluation
    def _env(self, p: Sequence[float], order: int) -> dict:
        env = {}
        for k in range(self.dim):
            env[f"x{k}"] = jet_variable(k, float(p[k]), self.dim, order)
        env["t"] = env["x0"]
        if self.dim == 3:
            env["x"], env["y"] = env["x1"], env["x2"]
        return env

    def metric_at(self, p: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise MetricError(f"point must have {self.dim} coordinates")
        if self.is_minkowski:
            g = np.eye(self.dim)
            g[0, 0] = -1.0
            return g, np.zeros((self.dim,) * 3)
        env = self._env(p, 1)
        g = np.eye(self.dim)
        g[0, 0] = -1.0
        dg = np.zeros((self.dim,) * 3)
        for (i, j), e in self.components:
            try:
                v = compile_expr(e)(env)
            except (ExprEvalError, ValueError, ZeroDivisionError) as exc:
                raise MetricError(f"g{i}{j} failed at {p.tolist()}: {exc}") from exc
            if isinstance(v, Jet):
                g[i, j] = g[j, i] = v.constant
                dg[:, i, j] = dg[:, j, i] = v.gradient()
            else:
                g[i, j] = g[j, i] = float(v)
                dg[:, i, j] = dg[:, j, i] = 0.0
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(dg)):
            raise MetricError(f"non-finite metric at {p.tolist()}")
        if self.check:
            check_signature(g)
        return g, dg

    def christoffels(self, p: Sequence[float]) -> np.ndarray:
        if self.is_minkowski:
            return np.zeros((self.dim,) * 3)
        return christoffels_from(*self.metric_at(p))

    def inner(self, p: Sequence[float], u: Sequence[float], v: Sequence[float]) -> float:
        g, _ = self.metric_at(p)
        return float(np.asarray(u) @ g @ np.asarray(v))


def minkowski(n: int) -> MetricChart:
    """Lorentz-Minkowski space of dimension ``n + 1`` with the fast path enabled."""
    return MetricChart(n + 1, (), "minkowski", f"minkowski{n + 1}")


def minkowski_as_generic(n: int) -> MetricChart:
    """Minkowski written out as expressions, so the generic code path is taken."""
    comps = tuple(((i, i), Num(-1.0 if i == 0 else 1.0)) for i in range(n + 1))
    return MetricChart(n + 1, comps, "generic", f"minkowski{n + 1}-generic")


def perturbed_metric(eps: float = 0.1) -> MetricChart:
    """Minkowski 3-space with ``g_12 = g_21 = eps * x1^2``.

    The perturbation is quadratic, so the chart is admissible at every point
    with ``x1 = 0``. The spatial part equals ``(dx2 + F dx1)^2 + (1 - F^2) dx1^2``
    with ``F = eps * x1^2``, a shear of the Euclidean plane: the chart is
    curvilinear (non-zero Christoffels) while the space itself stays flat.
    """
    return MetricChart.from_strings(3, {"g12": f"{eps!r} * x1^2"}, name=f"perturbed(eps={eps!r})")


# ---------------------------------------------------------------------------
# affine reparametrisation of a chart


@dataclass(frozen=True)
class AffineChart:
    """The chart ``base`` seen through ``x_old = offset + L @ x_new``."""

    base: object
    offset: np.ndarray
    L: np.ndarray

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return self.base.dim - 1

    @property
    def is_minkowski(self) -> bool:
        # a Lorentz transformation keeps the Minkowski fast path valid
        if not self.base.is_minkowski:
            return False
        eta = np.diag([-1.0] + [1.0] * (self.dim - 1))
        return bool(np.allclose(self.L.T @ eta @ self.L, eta, atol=1e-14, rtol=0))

    def to_base(self, p) -> np.ndarray:
        return self.offset + self.L @ np.asarray(p, dtype=float)

    def metric_at(self, p):
        g, dg = self.base.metric_at(self.to_base(p))
        L = self.L
        g2 = L.T @ g @ L
        dg2 = np.einsum("ck,cab,ai,bj->kij", L, dg, L, L)
        return g2, dg2

    def christoffels(self, p):
        if self.is_minkowski:
            return np.zeros((self.dim,) * 3)
        return christoffels_from(*self.metric_at(p))


# ---------------------------------------------------------------------------
# functional API


def metric_at(chart, p) -> tuple[np.ndarray, np.ndarray]:
    return chart.metric_at(p)


def christoffels(chart, p) -> np.ndarray:
    return chart.christoffels(p)


@dataclass
class AdmissibilityReport:
    point: list
    g00: float  # |g_00 + 1|
    g0i: float  # max |g_0i|
    gjk: float  # max |g_jk - delta_jk|
    christoffel: float  # max |Gamma|
    dg: float  # max |d g|
    tol: float
    admissible: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def is_admissible_at(chart, p, tol: float = 1e-9) -> AdmissibilityReport:
    """Check the admissible-chart conditions at ``p`` and report residuals."""
    g, dg = chart.metric_at(p)
    gam = christoffels_from(g, dg)
    n = g.shape[0] - 1
    r00 = abs(g[0, 0] + 1.0)
    r0i = float(np.max(np.abs(g[0, 1:]))) if n else 0.0
    rjk = float(np.max(np.abs(g[1:, 1:] - np.eye(n)))) if n else 0.0
    rg = float(np.max(np.abs(gam)))
    rdg = float(np.max(np.abs(dg)))
    ok = max(r00, r0i, rjk, rg) <= tol
    return AdmissibilityReport(
        [float(v) for v in p], float(r00), r0i, rjk, rg, rdg, tol, bool(ok)
    )
