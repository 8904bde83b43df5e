"""The light-like locus ``B = 0`` and checks of the light-like geodesic results.

* :func:`trace_locus` follows ``B = 0`` in a 2-dimensional domain by
  predictor-corrector continuation.
* :func:`verify_lightline` tests that the null geodesic through a
  degenerate light-like point stays on the surface.
* :func:`dichotomy_check` decides, at a light-like point, between a null
  regular locus across which the causal type changes (case ``"a"``) and a
  light-like line of degenerate points (case ``"b"``).
* :func:`prop41_check`, :func:`prop32_reference_check` and
  :func:`theorem_d_check` turn the remaining statements into residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cksolver import SeriesSurface, axis_coefficients
from .expr import Expr, to_text
from .geodesics import CurveSample, GeodesicError, curve_acceleration, geodesic_ivp
from .hypersurface import (
    DEFAULT_TOL_GRAD,
    CausalClass,
    ExprHeight,
    GraphSurface,
    PreconditionError,
    SurfaceError,
    b_data,
    minkowski_ab_jets,
    normalize_at_lightlike,
    point_report,
)
from .metric import is_admissible_at

__all__ = [
    "LocusError",
    "LocusCurve",
    "LineCheckReport",
    "DichotomyReport",
    "Prop41Report",
    "Prop32Report",
    "TheoremDReport",
    "trace_locus",
    "verify_lightline",
    "series_line_residual",
    "dichotomy_check",
    "prop41_check",
    "null_direction_curve",
    "prop32_reference_check",
    "reference_surface",
    "theorem_d_check",
    "not_isolated",
]


class LocusError(RuntimeError):
    """Continuation or line check could not proceed."""


# ---------------------------------------------------------------------------
# continuation


@dataclass
class LocusCurve:
    points: np.ndarray  # (N, 2)
    B: np.ndarray
    gradB: np.ndarray  # (N, 2)
    classes: list
    arclength: np.ndarray
    stop_reasons: tuple  # (backward, forward)
    degenerate_hit: bool
    seed_index: int

    def __len__(self) -> int:
        return len(self.points)

    def as_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "B": self.B.tolist(),
            "classes": list(self.classes),
            "arclength": self.arclength.tolist(),
            "stop_reasons": list(self.stop_reasons),
            "degenerate_hit": self.degenerate_hit,
        }


def _bgrad(F: GraphSurface, p: np.ndarray) -> tuple[float, np.ndarray]:
    r = point_report(F, p)
    return r.B, r.gradB


def _correct(F, p, tol: float, max_iter: int = 8) -> tuple[np.ndarray, float, np.ndarray] | None:
    for _ in range(max_iter + 1):
        B, g = _bgrad(F, p)
        if abs(B) <= tol:
            return p, B, g
        gg = float(g @ g)
        if gg == 0.0:
            return None
        p = p - B * g / gg
    return None


def trace_locus(
    F: GraphSurface,
    seed: Sequence[float],
    step: float = 1e-2,
    max_steps: int = 200,
    bounds: Sequence[tuple[float, float]] | None = None,
    tol_grad: float = DEFAULT_TOL_GRAD,
    corrector_tol: float = 1e-12,
) -> LocusCurve:
    """Follow ``B = 0`` through ``seed`` in both directions.

    ``bounds`` is a box ``[(lo1, hi1), (lo2, hi2)]`` (default: half-width 1
    about the seed). Each direction stops at the box, after ``max_steps``,
    when ``|grad B| < tol_grad`` (a degenerate point) or when the corrector
    fails even after the step has been halved down to ``step * 2^-10``.
    """
    if F.n != 2:
        raise PreconditionError("locus tracing is implemented for n = 2 only")
    seed = np.asarray(seed, dtype=float)
    if bounds is None:
        bounds = [(seed[0] - 1.0, seed[0] + 1.0), (seed[1] - 1.0, seed[1] + 1.0)]
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    _, g0 = _bgrad(F, seed)
    if np.linalg.norm(g0) < tol_grad:
        raise PreconditionError(
            f"seed {seed.tolist()} is degenerate (|grad B| = {np.linalg.norm(g0):.2e}); use verify_lightline"
        )
    start = _correct(F, seed, corrector_tol)
    if start is None:
        raise LocusError(f"corrector diverged from seed {seed.tolist()}")
    p0, B0, gr0 = start
    if np.linalg.norm(gr0) < tol_grad:
        raise PreconditionError("corrected seed is a degenerate light-like point")

    def tangent(g: np.ndarray) -> np.ndarray:
        t = np.array([-g[1], g[0]])
        return t / np.linalg.norm(t)

    branches = []
    reasons = []
    degenerate_hit = False
    for sign in (-1.0, 1.0):
        pts, Bs, grads = [], [], []
        p, g = p0, gr0
        prev_t = sign * tangent(g)
        reason = "max_steps"
        for _ in range(max_steps):
            h = step
            accepted = None
            while h >= step * 2.0**-10:
                t = tangent(g)
                if t @ prev_t < 0:
                    t = -t
                q = p + h * t
                try:
                    res = _correct(F, q, corrector_tol)
                except SurfaceError:
                    res = None
                if res is not None and np.linalg.norm(res[0] - p) <= 2.0 * h:
                    accepted = (res, t)
                    break
                h *= 0.5
            if accepted is None:
                reason = "corrector_failure"
                break
            (q, Bq, gq), t = accepted
            if np.any(q < lo) or np.any(q > hi):
                reason = "bounds"
                break
            pts.append(q)
            Bs.append(Bq)
            grads.append(gq)
            p, g, prev_t = q, gq, t
            if np.linalg.norm(gq) < tol_grad:
                reason = "degenerate_point"
                degenerate_hit = True
                break
        branches.append((pts, Bs, grads))
        reasons.append(reason)
    back, fwd = branches
    points = np.array(back[0][::-1] + [p0] + fwd[0]).reshape(-1, 2)
    Bv = np.array(back[1][::-1] + [B0] + fwd[1])
    gv = np.array(back[2][::-1] + [gr0] + fwd[2]).reshape(-1, 2)
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))])
    seed_index = len(back[0])
    arc = arc - arc[seed_index]
    classes = [
        (CausalClass.LIGHTLIKE_DEGENERATE if np.linalg.norm(gq) < tol_grad else CausalClass.LIGHTLIKE_NONDEGENERATE).value
        for gq in gv
    ]
    return LocusCurve(points, Bv, gv, classes, arc, tuple(reasons), degenerate_hit, seed_index)


# ---------------------------------------------------------------------------
# light-like line through a degenerate point


@dataclass
class LineCheckReport:
    ts: np.ndarray
    points: np.ndarray  # (N, n+1) ambient geodesic samples
    residuals: np.ndarray
    classes: list  # classification at the classified samples
    classified_ts: list
    all_degenerate: bool
    max_residual: float
    tol: float
    half_length: float
    verdict: bool
    surface: GraphSurface | None = None  # the normalised surface the residuals refer to

    def as_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "all_degenerate": self.all_degenerate,
            "verdict": "pass" if self.verdict else "fail",
            "tol": self.tol,
            "half_length": self.half_length,
            "samples": len(self.ts),
            "classes": sorted(set(self.classes)),
        }


def _is_normalised(F: GraphSurface, tol: float = 1e-13) -> bool:
    fj = F.height.jet(np.zeros(F.n), 1)
    target = np.zeros(F.n)
    target[-1] = 1.0
    return abs(fj.constant) <= tol and float(np.max(np.abs(fj.gradient() - target))) <= tol


def verify_lightline(
    F: GraphSurface,
    o: Sequence[float] | None = None,
    half_length: float = 0.5,
    step: float = 1e-3,
    tol: float = 1e-12,
    classify_every: int = 20,
    require_degenerate: bool = True,
    tol_grad: float = DEFAULT_TOL_GRAD,
) -> LineCheckReport:
    """Integrate the null geodesic through ``F(o)`` in the direction ``dF(d/dx_n)``.

    The surface is normalised at ``o`` first (``f(o) = 0``,
    ``grad f(o) = e_n``), so the initial velocity is ``(1, 0, ..., 0, 1)``.
    The residual at each sample ``sigma`` is ``|sigma_0 - f(sigma_1..sigma_n)|``.
    """
    n = F.n
    o = np.zeros(n) if o is None else np.asarray(o, dtype=float)
    r = point_report(F, o, tol_grad=tol_grad)
    if require_degenerate and r.cls is not CausalClass.LIGHTLIKE_DEGENERATE:
        raise PreconditionError(f"point {o.tolist()} is {r.cls.value}, not a degenerate light-like point")
    if not r.cls.is_lightlike:
        raise PreconditionError(f"point {o.tolist()} is not light-like ({r.cls.value})")
    G = F if (np.all(o == 0.0) and _is_normalised(F)) else normalize_at_lightlike(F, o)
    if not G.ambient.is_minkowski:
        rep = is_admissible_at(G.ambient, np.zeros(n + 1), 1e-9)
        if not rep.admissible:
            raise PreconditionError(f"ambient chart is not admissible at F(o): {rep.as_dict()}")
    v0 = np.zeros(n + 1)
    v0[0] = v0[-1] = 1.0
    x0 = np.zeros(n + 1)
    try:
        back = geodesic_ivp(G.ambient, x0, v0, (0.0, -half_length), step)
        fwd = geodesic_ivp(G.ambient, x0, v0, (0.0, half_length), step)
    except GeodesicError as exc:
        raise LocusError(f"geodesic integration failed: {exc}") from exc
    samples = back[::-1] + fwd[1:]
    ts = np.array([s.t for s in samples])
    pts = np.array([s.x for s in samples])
    res = np.empty(len(samples))
    for k, s in enumerate(samples):
        try:
            res[k] = abs(s.x[0] - G.height.value(s.x[1:]))
        except SurfaceError as exc:
            raise LocusError(f"geodesic leaves the domain of f at t = {s.t:.6g}: {exc}") from exc
    classes, cts = [], []
    idx = sorted(set(range(0, len(samples), max(1, classify_every))) | {len(samples) - 1, len(back) - 1})
    for k in idx:
        rk = point_report(G, pts[k, 1:], tol_grad=tol_grad)
        classes.append(rk.cls.value)
        cts.append(float(ts[k]))
    all_deg = all(c == CausalClass.LIGHTLIKE_DEGENERATE.value for c in classes)
    mx = float(np.max(res))
    return LineCheckReport(
        ts, pts, res, classes, cts, all_deg, mx, tol, half_length, bool(mx < tol and all_deg), G
    )


def series_line_residual(s: SeriesSurface) -> float:
    """Largest deviation of the pure-``x_n`` coefficients of ``f`` from those of ``x_n``."""
    c = axis_coefficients(s)
    target = np.zeros_like(c)
    target[1] = 1.0
    return float(np.max(np.abs(c - target)))


# ---------------------------------------------------------------------------
# dichotomy at a light-like point


@dataclass
class DichotomyReport:
    case: str  # "a", "b", "ambiguous" or "inconclusive"
    point: list
    grad_norm: float
    A_at_point: float
    null_defect: float | None = None
    margin: float | None = None
    sign_change: bool | None = None
    locus: LocusCurve | None = None
    line: LineCheckReport | None = None

    def as_dict(self) -> dict:
        d = {
            "case": self.case,
            "point": self.point,
            "grad_norm": self.grad_norm,
            "A_at_point": self.A_at_point,
            "null_defect": self.null_defect,
            "margin": self.margin,
            "sign_change": self.sign_change,
        }
        if self.locus is not None:
            d["locus_samples"] = len(self.locus)
        if self.line is not None:
            d["line"] = self.line.as_dict()
        return d


def _independence(F: GraphSurface, p: np.ndarray) -> tuple[float, float]:
    """(null defect, independence margin) of the locus image at ``p``."""
    B, gB, HB = b_data(F, p)
    r = point_report(F, p)
    gn = float(gB @ gB)
    tau = np.array([-gB[1], gB[0]]) / math.sqrt(gn)
    null = abs(float(tau @ r.S @ tau))
    # curvature of the level set: gamma'' = -(tau^T H_B tau) grad B / |grad B|^2
    gam2 = -float(tau @ HB @ tau) * gB / gn
    fj = F.height.jet(p, 2)
    df, hf = fj.gradient(), fj.hessian()
    v = np.concatenate([[df @ tau], tau])
    acc = np.concatenate([[float(tau @ hf @ tau + df @ gam2)], gam2])
    X = F.point(p)
    acc = acc + np.einsum("cab,a,b->c", F.ambient.christoffels(X), v, v)
    M = np.column_stack([v / np.linalg.norm(v), acc / max(np.linalg.norm(acc), 1e-300)])
    margin = float(np.linalg.svd(M, compute_uv=False)[-1])
    return null, margin


def dichotomy_check(
    F: GraphSurface,
    o: Sequence[float],
    tol_grad: float = DEFAULT_TOL_GRAD,
    half_length: float = 0.5,
    trace_length: float = 0.2,
    trace_step: float = 1e-2,
    sign_offset: float = 1e-4,
    null_tol: float = 1e-8,
    margin_min: float = 0.1,
) -> DichotomyReport:
    """Classify the light-like point ``o`` into case ``"a"`` or ``"b"``.

    ``|grad B(o)|`` at most ``tol_grad`` gives case ``"b"`` (checked with
    :func:`verify_lightline`); above ``100 * tol_grad`` the locus is traced
    and checked for being null, for the independence of velocity and
    acceleration of its image, and for a sign change of ``B`` across it.
    Values in between are reported as ``"ambiguous"``.
    """
    if F.n != 2:
        raise PreconditionError("the dichotomy check is implemented for n = 2")
    o = np.asarray(o, dtype=float)
    r = point_report(F, o, tol_grad=tol_grad)
    if not r.cls.is_lightlike:
        raise PreconditionError(f"point {o.tolist()} is {r.cls.value}, not light-like")
    gnorm = float(np.linalg.norm(r.gradB))
    rep = DichotomyReport("inconclusive", o.tolist(), gnorm, abs(r.A))
    if gnorm <= tol_grad:
        line = verify_lightline(F, o, half_length=half_length, tol_grad=tol_grad)
        rep.line = line
        rep.case = "b" if line.verdict else "inconclusive"
        return rep
    if gnorm < 100.0 * tol_grad:
        rep.case = "ambiguous"
        return rep
    steps = max(1, int(round(trace_length / trace_step)))
    curve = trace_locus(F, o, step=trace_step, max_steps=steps, tol_grad=tol_grad)
    rep.locus = curve
    nulls, margins, signs = [], [], []
    for p, g in zip(curve.points, curve.gradB):
        nd, mg = _independence(F, p)
        nulls.append(nd)
        margins.append(mg)
        nhat = g / np.linalg.norm(g)
        Bp = point_report(F, p + sign_offset * nhat).B
        Bm = point_report(F, p - sign_offset * nhat).B
        signs.append(Bp > 0 > Bm)
    rep.null_defect = float(max(nulls))
    rep.margin = float(min(margins))
    rep.sign_change = bool(all(signs))
    if rep.null_defect < null_tol and rep.margin > margin_min and rep.sign_change:
        rep.case = "a"
    return rep


# ---------------------------------------------------------------------------
# curves of degenerate light-like points


@dataclass
class Prop41Report:
    max_defect: float
    defects: list
    max_B: float
    max_gradB: float
    max_null: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _fd_velocity(ts: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return np.gradient(pts, ts, axis=0, edge_order=2)


def prop41_check(
    F: GraphSurface,
    ts: Sequence[float],
    points: Sequence[Sequence[float]],
    tol: float = 1e-8,
    velocities: Sequence[Sequence[float]] | None = None,
) -> Prop41Report:
    """Proportionality defect of the image acceleration to the image velocity.

    ``points`` samples a domain curve on the uniform grid ``ts``. Along it
    ``|B|``, ``|grad B|`` and ``|g(image velocity, image velocity)|`` must
    be below ``tol`` (scaled by ``1 + |S|`` for the last one), otherwise
    :class:`PreconditionError` is raised. The defect at an interior sample
    is the Euclidean norm of the part of the acceleration orthogonal to the
    velocity, divided by ``|acceleration| + |velocity|``.
    """
    ts = np.asarray(ts, dtype=float)
    pts = np.asarray(points, dtype=float)
    if len(ts) < 3 or pts.shape != (len(ts), F.n):
        raise ValueError("need at least three samples of shape (len(ts), n)")
    vel = _fd_velocity(ts, pts) if velocities is None else np.asarray(velocities, dtype=float)
    samples = []
    mB = mG = mN = 0.0
    for t, p, w in zip(ts, pts, vel):
        r = point_report(F, p)
        mB = max(mB, abs(r.B))
        mG = max(mG, float(np.max(np.abs(r.gradB))))
        mN = max(mN, abs(float(w @ r.S @ w)) / (1.0 + float(np.max(np.abs(r.S)))) / max(float(w @ w), 1e-300))
        fj = F.height.jet(p, 1)
        v = np.concatenate([[fj.gradient() @ w], w])
        samples.append(CurveSample(float(t), F.point(p), v))
    if mB > tol or mG > tol:
        raise PreconditionError(f"curve is not made of degenerate light-like points (|B| {mB:.2e}, |grad B| {mG:.2e})")
    if mN > tol:
        raise PreconditionError(f"curve is not null (normalised |g(v, v)| = {mN:.2e})")
    defects = []
    for s in samples[1:-1]:
        a = curve_acceleration(F.ambient, samples, s.t)
        vhat = s.v / np.linalg.norm(s.v)
        perp = a - (a @ vhat) * vhat
        defects.append(float(np.linalg.norm(perp) / (np.linalg.norm(a) + np.linalg.norm(s.v))))
    return Prop41Report(float(max(defects)), defects, mB, mG, mN)


def null_direction_curve(
    F: GraphSurface, p: Sequence[float], length: float = 0.2, step: float = 1e-2
) -> tuple[np.ndarray, np.ndarray]:
    """Integral curve of the unit null direction of ``S`` through ``p`` (RK4).

    Meant for light-like surfaces, where ``S`` has a one-dimensional kernel
    at every point. Returns ``(ts, points)`` centred at ``p``.
    """
    p = np.asarray(p, dtype=float)

    def kernel(q: np.ndarray, ref: np.ndarray | None) -> np.ndarray:
        S = point_report(F, q).S
        w, V = np.linalg.eigh(S)
        k = V[:, int(np.argmin(np.abs(w)))]
        if ref is not None and k @ ref < 0:
            k = -k
        return k

    k0 = kernel(p, None)
    if k0[-1] < 0 or (k0[-1] == 0 and k0[0] < 0):
        k0 = -k0
    count = max(1, int(round(length / step)))
    branches = []
    for sign in (-1.0, 1.0):
        q, ref = p.copy(), sign * k0
        pts = []
        for _ in range(count):
            a = kernel(q, ref)
            b = kernel(q + 0.5 * step * a, a)
            c = kernel(q + 0.5 * step * b, a)
            d = kernel(q + step * c, a)
            q = q + step / 6.0 * (a + 2 * b + 2 * c + d)
            ref = a
            pts.append(q)
        branches.append(pts)
    pts = np.array(branches[0][::-1] + [p] + branches[1])
    ts = step * np.arange(-count, count + 1, dtype=float)
    return ts, pts


# ---------------------------------------------------------------------------
# reference surface along the x_n axis


@dataclass
class Prop32Report:
    xn: list
    B: float
    B_transverse: float
    A: float
    A_transverse: float
    method: str

    def max(self) -> float:
        return max(self.B, self.B_transverse, self.A, self.A_transverse)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["max"] = self.max()
        return d


def reference_surface(chart, c: dict, n: int) -> GraphSurface:
    """``f_0 = x_n + sum_{j<=k<n} c_jk x_j x_k``; ``c`` maps ``(j, k)`` to expressions."""
    terms = [f"x{n}"]
    for (j, k), e in sorted(c.items()):
        if not (1 <= j <= k <= n - 1):
            raise ValueError(f"coefficient index {(j, k)} out of range 1 <= j <= k <= {n - 1}")
        text = to_text(e) if isinstance(e, Expr) else str(e)
        terms.append(f"({text})*x{j}*x{k}")
    h = ExprHeight.from_text(" + ".join(terms), n)
    return GraphSurface(h, chart)


def prop32_reference_check(
    chart,
    c: dict,
    xn_grid: Sequence[float],
    n: int,
    fd_step: float = 1e-3,
    tol_admissible: float = 1e-6,
) -> Prop32Report:
    """Sup-norms of ``B``, ``B_{x_i}``, ``A`` and ``A_{x_i}`` (``i < n``) on the ``x_n`` axis.

    In Minkowski space everything comes from exact jets. Otherwise ``A``
    uses the general path and ``A_{x_i}`` Richardson central differences;
    the chart must be admissible at ``(x_n, 0, ..., 0, x_n)`` for every grid
    value.
    """
    F = reference_surface(chart, c, n)
    res = np.zeros(4)
    minkowski = chart.is_minkowski
    for t in xn_grid:
        p = np.zeros(n)
        p[-1] = float(t)
        if minkowski:
            A, B = minkowski_ab_jets(F.height.jet(p, 3))
            res[0] = max(res[0], abs(B.constant))
            res[1] = max(res[1], float(np.max(np.abs(B.gradient()[:-1]))))
            res[2] = max(res[2], abs(A.constant))
            res[3] = max(res[3], float(np.max(np.abs(A.gradient()[:-1]))))
            continue
        X = np.zeros(n + 1)
        X[0] = X[-1] = float(t)
        rep = is_admissible_at(chart, X, tol_admissible)
        if not rep.admissible:
            raise PreconditionError(f"chart is not admissible at {X.tolist()}: {rep.as_dict()}")
        r = point_report(F, p)
        res[0] = max(res[0], abs(r.B))
        res[1] = max(res[1], float(np.max(np.abs(r.gradB[:-1]))))
        res[2] = max(res[2], abs(r.A))
        for i in range(n - 1):
            e = np.zeros(n)
            e[i] = 1.0

            def A_at(s: float) -> float:
                return point_report(F, p + s * e).A

            d1 = (A_at(fd_step) - A_at(-fd_step)) / (2 * fd_step)
            d2 = (A_at(0.5 * fd_step) - A_at(-0.5 * fd_step)) / fd_step
            res[3] = max(res[3], abs((4 * d2 - d1) / 3))
    return Prop32Report(
        [float(t) for t in xn_grid], *map(float, res), "jets" if minkowski else "finite-differences"
    )


# ---------------------------------------------------------------------------
# bounded mean curvature


@dataclass
class TheoremDReport:
    radii: list
    inf_H: list
    sup_H: list
    skipped: list  # points dropped because |B| was below tolerance
    slope_sup: float
    slope_inf: float
    divergent: bool
    status: str  # "bounded", "unbounded" or "not_applicable"
    b_order: int | None
    m: float | None
    m_even: bool | None
    line: LineCheckReport | None = None

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "line"}
        d["line"] = None if self.line is None else self.line.as_dict()
        return d


def _ring_points(o: np.ndarray, r: float, radial: int, angular: int) -> np.ndarray:
    rs = np.linspace(0.5 * r, r, radial)
    th = (np.arange(angular) + 0.5) * (2 * np.pi / angular)
    pts = [o + rr * np.array([math.cos(a), math.sin(a)]) for rr in rs for a in th]
    return np.array(pts)


def _monotone_slope(radii: np.ndarray, vals: np.ndarray) -> float:
    return float(np.polyfit(np.log(radii), np.log(vals), 1)[0])


def theorem_d_check(
    F: GraphSurface,
    o: Sequence[float] | None = None,
    radii: Sequence[float] = (0.1, 0.05, 0.025),
    radial: int = 5,
    angular: int = 24,
    half_length: float = 0.5,
    slope_threshold: float = 0.25,
    zero_threshold: float = 1e-8,
    jet_order: int = 8,
) -> TheoremDReport:
    """Estimate ``inf |H|`` and ``sup |H|`` on nested punctured neighbourhoods of ``o``.

    For each radius ``r`` the samples are ``radial x angular`` points on the
    annulus ``r/2 <= |x - o| <= r``. Divergence is flagged when ``sup |H|``
    grows (or ``inf |H|`` shrinks) monotonically as ``r`` decreases with a
    log-log slope steeper than ``slope_threshold``. When bounded, the line
    residual sweep of :func:`verify_lightline` is run from ``o``. The
    vanishing order of ``B`` along the ``x_1`` axis is read from a jet.
    """
    if F.n != 2:
        raise PreconditionError("the mean-curvature sweep is implemented for n = 2")
    o = np.zeros(2) if o is None else np.asarray(o, dtype=float)
    r0 = point_report(F, o)
    if not r0.cls.is_lightlike:
        raise PreconditionError(f"point {o.tolist()} is not light-like")
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    infs, sups, skipped = [], [], []
    for r in radii:
        vals = []
        skip = 0
        for p in _ring_points(o, r, radial, angular):
            rep = point_report(F, p)
            if rep.H is None:
                skip += 1
                continue
            vals.append(abs(rep.H))
        if not vals:
            raise LocusError(f"no sample with |B| above tolerance on radius {r}")
        infs.append(float(min(vals)))
        sups.append(float(max(vals)))
        skipped.append(skip)
    infs_a, sups_a = np.array(infs), np.array(sups)

    b_order = m = m_even = None
    G = F if (np.all(o == 0.0) and _is_normalised(F)) else None
    if G is None:
        try:
            G = normalize_at_lightlike(F, o)
        except PreconditionError:
            G = None
    if G is not None and G.ambient.is_minkowski:
        fj = G.height.jet(np.zeros(2), jet_order + 1)
        _, B = minkowski_ab_jets(fj)
        for k in range(B.order + 1):
            if abs(B.coeff((k, 0))) > 1e-12:
                b_order = k
                break
        if b_order is not None:
            m = b_order / 2.0
            m_even = bool(b_order % 4 == 0)

    if sups_a.max() < zero_threshold:
        return TheoremDReport(
            radii.tolist(), infs, sups, skipped, 0.0, 0.0, False, "not_applicable", b_order, m, m_even
        )
    slope_sup = _monotone_slope(radii, sups_a)
    slope_inf = _monotone_slope(radii, np.maximum(infs_a, 1e-300))
    # radii decrease along the arrays, so growth towards o means increasing values
    grow = bool(np.all(np.diff(sups_a) > 0)) and slope_sup < -slope_threshold
    shrink = bool(np.all(np.diff(infs_a) < 0)) and slope_inf > slope_threshold
    divergent = grow or shrink
    line = None
    if not divergent:
        line = verify_lightline(F, o, half_length=half_length, require_degenerate=False)
    return TheoremDReport(
        radii.tolist(), infs, sups, skipped, slope_sup, slope_inf, divergent,
        "unbounded" if divergent else "bounded", b_order, m, m_even, line,
    )


# ---------------------------------------------------------------------------


def not_isolated(F: GraphSurface, o: Sequence[float], radius: float = 0.05, tol_grad: float = DEFAULT_TOL_GRAD) -> bool:
    """Whether the light-like set near ``o`` contains points other than ``o``.

    Degenerate points are extended by the light-like line, non-degenerate
    ones by the traced locus.
    """
    o = np.asarray(o, dtype=float)
    r = point_report(F, o, tol_grad=tol_grad)
    if not r.cls.is_lightlike:
        raise PreconditionError(f"point {o.tolist()} is not light-like")
    if r.cls is CausalClass.LIGHTLIKE_DEGENERATE:
        line = verify_lightline(F, o, half_length=radius, step=radius / 10, tol=1e-10, classify_every=1)
        return bool(line.max_residual < 1e-10 and len(line.ts) > 1)
    curve = trace_locus(F, o, step=radius / 5, max_steps=5, tol_grad=tol_grad)
    others = np.linalg.norm(curve.points - o, axis=1) > 0.5 * radius / 5
    return bool(np.any(others))
