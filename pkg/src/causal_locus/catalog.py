"""Builtin example surfaces and charts.

Every entry carries a self-check that is run when the entry is loaded:
the printed closed forms of ``A`` and ``B`` are compared with the computed
values at three seeded random points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hypersurface import GraphSurface, graph, minkowski_ab_jets, point_report
from .metric import is_admissible_at, minkowski, perturbed_metric

__all__ = ["CatalogEntry", "CatalogError", "CATALOG", "get", "ids", "F1_AB", "F3_AB"]

SELF_CHECK_SEED = 20240917
SELF_CHECK_TOL = 1e-11


class CatalogError(LookupError):
    """Unknown example id or failed self-check."""


def F1_AB(x: float, y: float) -> tuple[float, float]:
    """Closed forms of ``A`` and ``B`` for ``f = y + x^2 + x^3 + y x^4``."""
    A = 2 * x**4 * (6 + 6 * x + 4 * y * x**2 + 7 * x**4 + 9 * x**5 + 10 * y * x**6)
    B = -(x**2) * (4 + 12 * x + (11 + 16 * y) * x**2 + 24 * y * x**3 + 16 * y**2 * x**4 + x**6)
    return A, B


def F3_AB(x: float, y: float) -> tuple[float, float]:
    """Closed forms of ``A`` and ``B`` for ``f = y + x^3 + x^4 + y x^5``."""
    A = 2 * x**6 * (9 + 8 * x + 5 * y * x**2 + 12 * x**5 + 14 * x**6 + 15 * y * x**7)
    B = -(x**4) * (9 + 26 * x + 2 * (8 + 15 * y) * x**2 + 40 * y * x**3 + 25 * y**2 * x**4 + x**6)
    return A, B


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _sample_points(k: int = 3) -> np.ndarray:
    return np.random.default_rng(SELF_CHECK_SEED).uniform(-0.5, 0.5, size=(k, 2))


def _closed_form_check(closed: Callable[[float, float], tuple[float, float]]):
    def check(F: GraphSurface) -> float:
        worst = 0.0
        for x, y in _sample_points():
            r = point_report(F, [x, y])
            A, B = closed(x, y)
            worst = max(worst, _rel(r.A, A), _rel(r.B, B))
        return worst

    return check


def _leading_factor_check(F: GraphSurface) -> float:
    """``A = 6 x^4 (1 + O(x))`` and ``B = x^3 (2 + O(x))`` at random ``y``."""
    worst = 0.0
    for _, y in _sample_points():
        A, B = minkowski_ab_jets(F.height.jet([0.0, y], 7))
        a = [A.coeff((k, 0)) for k in range(5)]
        b = [B.coeff((k, 0)) for k in range(4)]
        worst = max(worst, *map(abs, a[:4]), abs(a[4] - 6.0), *map(abs, b[:3]), abs(b[3] - 2.0))
    return worst


def _zero_check(fields: tuple[str, ...]):
    def check(F: GraphSurface) -> float:
        worst = 0.0
        for p in _sample_points():
            r = point_report(F, p)
            worst = max(worst, *(abs(getattr(r, k)) for k in fields))
        return worst

    return check


def _metric_check(F: GraphSurface) -> float:
    for x, y in _sample_points():
        F.ambient.metric_at([0.0, x, y])  # raises on a signature change
    rep = is_admissible_at(F.ambient, np.zeros(3))
    return max(rep.g00, rep.g0i, rep.gjk, rep.christoffel)


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    n: int
    f: str
    metric: str  # "minkowski" or "perturbed"
    point: tuple
    expect: str  # expected causal class at ``point``
    check: Callable[[GraphSurface], float]

    def chart(self):
        return minkowski(self.n) if self.metric == "minkowski" else perturbed_metric(0.1)

    def surface(self) -> GraphSurface:
        return graph(self.f, self.n, self.chart())

    def self_check(self) -> float:
        return float(self.check(self.surface()))

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "n": self.n,
            "f": self.f,
            "metric": self.metric,
            "point": list(self.point),
            "expect": self.expect,
        }


CATALOG: dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        CatalogEntry(
            "F1", "degenerate light-like point, bounded non-analytic H", 2,
            "y + x^2 + x^3 + y*x^4", "minkowski", (0.0, 0.0), "lightlike_degenerate",
            _closed_form_check(F1_AB),
        ),
        CatalogEntry(
            "F2", "degenerate light-like point, unbounded H", 2,
            "y - (1 + y)*x^3 - y^3*x^4", "minkowski", (0.0, 0.0), "lightlike_degenerate",
            _leading_factor_check,
        ),
        CatalogEntry(
            "F3", "degenerate light-like point, analytic bounded H", 2,
            "y + x^3 + x^4 + y*x^5", "minkowski", (0.0, 0.0), "lightlike_degenerate",
            _closed_form_check(F3_AB),
        ),
        CatalogEntry(
            "kobayashi", "zero mean curvature graph changing causal type", 2,
            "(x + 1)*tanh(y)", "minkowski", (0.0, 0.0), "lightlike_nondegenerate",
            _zero_check(("A",)),
        ),
        CatalogEntry(
            "lightcone", "light cone through the origin", 2,
            "sqrt(x^2 + (y + 1)^2) - 1", "minkowski", (0.0, 0.0), "lightlike_degenerate",
            _zero_check(("A", "B")),
        ),
        CatalogEntry(
            "lightplane", "light-like plane", 2,
            "y", "minkowski", (0.0, 0.0), "lightlike_degenerate",
            _zero_check(("A", "B")),
        ),
        CatalogEntry(
            "perturbed", "plane f = x2 in the perturbed metric g12 = 0.1 x1^2", 2,
            "y", "perturbed", (0.0, 0.0), "lightlike_degenerate",
            _metric_check,
        ),
    ]
}


def ids() -> list[str]:
    return list(CATALOG)


def get(entry_id: str, verify: bool = True) -> CatalogEntry:
    """Look up an entry; with ``verify`` its self-check must pass."""
    try:
        e = CATALOG[entry_id]
    except KeyError:
        raise CatalogError(f"unknown example id {entry_id!r}; known: {', '.join(CATALOG)}") from None
    if verify:
        worst = e.self_check()
        if not worst <= SELF_CHECK_TOL:
            raise CatalogError(f"self-check of {entry_id!r} failed: residual {worst:.3e}")
    return e
