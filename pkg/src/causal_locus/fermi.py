"""Fermi coordinates along a light-like geodesic.

Given a null geodesic ``sigma`` with a parallel null frame ``E_0 = sigma'``,
``E_1`` (null, ``g(E_0, E_1) = -1``) and orthonormal ``E_2..E_n``, the map

    Phi(y_0, y_1, ..., y_n) = Exp_{sigma(y_0)}(sum_{i>=1} y_i E_i(y_0))

followed by the linear change ``x_0 = (y_0 + y_1)/sqrt2``,
``x_n = (y_0 - y_1)/sqrt2``, ``x_i = y_{i+1}`` gives coordinates in which
the metric is ``diag(-1, 1, ..., 1)`` and all Christoffel symbols vanish
along ``sigma``; ``sigma(t)`` sits at ``x = (t/sqrt2, 0, ..., 0, t/sqrt2)``.

The pulled-back metric and its Christoffel symbols are computed from
Richardson-extrapolated central differences of the composite map, through
the transformation law ``Gamma' = J^{-1} (d^2 Psi + Gamma(J, J))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geodesics import DEFAULT_STEP, GeodesicError, exp_map, transport_system
from .metric import christoffels_from

__all__ = [
    "FermiError",
    "NullFrame",
    "FermiChart",
    "FermiReport",
    "null_pattern",
    "null_frame_at",
    "build_fermi_chart",
    "verify_fermi",
    "jacobian_sign_check",
]

SQRT2 = math.sqrt(2.0)


class FermiError(ValueError):
    """Bad input to the Fermi construction (non-null direction, step too large, ...)."""


def null_pattern(dim: int) -> np.ndarray:
    """Gram matrix a null frame must have: ``g(e0, e1) = -1``, ``e_j`` orthonormal for ``j >= 2``."""
    P = np.zeros((dim, dim))
    P[0, 1] = P[1, 0] = -1.0
    P[2:, 2:] = np.eye(dim - 2)
    return P


@dataclass(frozen=True)
class NullFrame:
    point: np.ndarray
    vectors: np.ndarray  # rows e_0 .. e_n

    def gram(self, chart) -> np.ndarray:
        g, _ = chart.metric_at(self.point)
        return self.vectors @ g @ self.vectors.T

    def defect(self, chart) -> float:
        G = self.gram(chart)
        return float(np.max(np.abs(G - null_pattern(G.shape[0]))))


def _frame_from(g: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    dim = g.shape[0]
    if not np.any(v):
        raise FermiError("null direction must be nonzero")
    vv = float(v @ g @ v)
    if abs(vv) > tol * max(1.0, float(v @ v)):
        raise FermiError(f"direction is not null: g(v, v) = {vv:.3e}")
    gv = g @ v
    k = int(np.argmax(np.abs(gv)))  # argmax returns the lowest index on ties
    w = np.zeros(dim)
    w[k] = 1.0
    gvw = float(gv[k])
    e1 = (w - (g[k, k] / (2.0 * gvw)) * v) / (-gvw)
    frame = [v.astype(float), e1]
    # complement of span(e0, e1): u + g(u, e1) e0 + g(u, e0) e1 is orthogonal to both
    for j in range(dim):
        if len(frame) == dim:
            break
        u = np.zeros(dim)
        u[j] = 1.0
        u = u + float(u @ g @ e1) * v + float(u @ g @ v) * e1
        for e in frame[2:]:
            u = u - float(u @ g @ e) * e
        nrm = float(u @ g @ u)
        if nrm > 1e-8:
            frame.append(u / math.sqrt(nrm))
    if len(frame) != dim:  # pragma: no cover - the complement is spacelike of full rank
        raise FermiError("could not complete the null frame")
    return np.array(frame)


def null_frame_at(chart, p: Sequence[float], v_null: Sequence[float], tol: float = 1e-10) -> NullFrame:
    """Null frame at ``p`` with ``e_0 = v_null``."""
    p = np.asarray(p, dtype=float)
    g, _ = chart.metric_at(p)
    return NullFrame(p, _frame_from(g, np.asarray(v_null, dtype=float), tol))


# ---------------------------------------------------------------------------


def _central(fun, x: np.ndarray, h: float) -> np.ndarray:
    """Jacobian columns ``d fun / d x_a`` by central differences, Richardson-extrapolated."""
    dim = len(x)
    cols = []
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = 1.0
        d1 = (fun(x + h * e) - fun(x - h * e)) / (2 * h)
        d2 = (fun(x + 0.5 * h * e) - fun(x - 0.5 * h * e)) / h
        cols.append((4.0 * d2 - d1) / 3.0)
    return np.array(cols).T


def _second(fun, x: np.ndarray, h: float, f0: np.ndarray | None = None) -> np.ndarray:
    """``out[k, a, b] = d^2 fun_k / dx_a dx_b``, Richardson-extrapolated."""
    dim = len(x)
    if f0 is None:
        f0 = fun(x)
    E = np.eye(dim)

    def at(s: float) -> np.ndarray:
        out = np.zeros((len(f0), dim, dim))
        for a in range(dim):
            out[:, a, a] = (fun(x + s * E[a]) - 2 * f0 + fun(x - s * E[a])) / (s * s)
            for b in range(a + 1, dim):
                val = (
                    fun(x + s * (E[a] + E[b]))
                    - fun(x + s * (E[a] - E[b]))
                    - fun(x - s * (E[a] - E[b]))
                    + fun(x - s * (E[a] + E[b]))
                ) / (4 * s * s)
                out[:, a, b] = out[:, b, a] = val
        return out

    return (4.0 * at(0.5 * h) - at(h)) / 3.0


@dataclass
class FermiChart:
    """Fermi coordinates ``x`` along a sampled null geodesic.

    Exposes the chart protocol (``dim``, ``is_minkowski``, ``metric_at``,
    ``christoffels``) for the pulled-back metric, so it can serve as the
    ambient of a :class:`~causal_locus.hypersurface.GraphSurface`.
    """

    ambient: object
    ts: np.ndarray
    sigma: np.ndarray  # (N, dim)
    velocity: np.ndarray  # (N, dim)
    frames: np.ndarray  # (N, dim, dim), rows E_alpha(t)
    eps: float
    fd_step: float
    exp_step: float = 0.1
    parallel: bool = True
    step: float = DEFAULT_STEP
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.ambient.dim

    @property
    def n(self) -> int:
        return self.dim - 1

    @property
    def is_minkowski(self) -> bool:
        # the pulled-back metric is only Minkowski along sigma; never take the fast path
        return False

    # -- coordinates
    def to_y(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.empty_like(x)
        y[0] = (x[0] + x[-1]) / SQRT2
        y[1] = (x[0] - x[-1]) / SQRT2
        y[2:] = x[1:-1]
        return y

    def to_x(self, y: Sequence[float]) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        x = np.empty_like(y)
        x[0] = (y[0] + y[1]) / SQRT2
        x[-1] = (y[0] - y[1]) / SQRT2
        x[1:-1] = y[2:]
        return x

    def axis_point(self, t: float) -> np.ndarray:
        """Fermi coordinates of ``sigma(t)``."""
        y = np.zeros(self.dim)
        y[0] = t
        return self.to_x(y)

    # -- base curve
    def frame_at(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``sigma(t)``, ``sigma'(t)`` and the frame rows at an arbitrary ``t``."""
        lo, hi = self.ts[0], self.ts[-1]
        slack = abs(self.ts[1] - self.ts[0]) if len(self.ts) > 1 else 0.0
        if t < min(lo, hi) - slack or t > max(lo, hi) + slack:
            raise FermiError(f"t = {t:.6g} is outside the base geodesic's parameter range")
        k = int(np.argmin(np.abs(self.ts - t)))
        if t == self.ts[k]:
            return self.sigma[k], self.velocity[k], self.frames[k]
        if not self.parallel:
            xs, vs, _ = transport_system(self.ambient, self.sigma[k], self.velocity[k], None, np.array([self.ts[k], t]))
            return xs[-1], vs[-1], self.frames[k]
        xs, vs, Ws = transport_system(
            self.ambient, self.sigma[k], self.velocity[k], self.frames[k], np.array([self.ts[k], t])
        )
        return xs[-1], vs[-1], Ws[-1]

    def phi(self, y: Sequence[float]) -> np.ndarray:
        """``Exp_{sigma(y_0)}(sum_{i>=1} y_i E_i(y_0))`` in ambient coordinates."""
        y = np.asarray(y, dtype=float)
        base, _, E = self.frame_at(float(y[0]))
        w = y[1:] @ E[1:]
        return exp_map(self.ambient, base, w, step=self.exp_step)

    def psi(self, x: Sequence[float]) -> np.ndarray:
        """Ambient point with Fermi coordinates ``x``."""
        return self.phi(self.to_y(x))

    # -- pulled-back metric
    def _check_box(self, x: np.ndarray) -> None:
        y = self.to_y(x)
        if np.max(np.abs(y[1:])) + 2 * self.fd_step > self.eps * (1 + 1e-12):
            raise FermiError(
                f"point {x.tolist()} with fd_step {self.fd_step} leaves the transverse box of half-width {self.eps}"
            )

    def _derivatives(self, x: np.ndarray):
        key = tuple(np.round(x, 15))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self._check_box(x)
        X = self.psi(x)
        J = _central(self.psi, x, self.fd_step)
        H = _second(self.psi, x, self.fd_step, X)
        out = (X, J, H)
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = out
        return out

    def metric_at(self, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        X, J, H = self._derivatives(x)
        g, dg = self.ambient.metric_at(X)
        G = J.T @ g @ J
        # d_k G_ab = H[:, a, k]^T g J_b + J_a^T g H[:, b, k] + J_a^T (d_c g J^c_k) J_b
        dgk = np.einsum("cij,ck->kij", dg, J)
        dG = (
            np.einsum("iak,ij,jb->kab", H, g, J)
            + np.einsum("ia,ij,jbk->kab", J, g, H)
            + np.einsum("ia,kij,jb->kab", J, dgk, J)
        )
        return 0.5 * (G + G.T), 0.5 * (dG + np.transpose(dG, (0, 2, 1)))

    def christoffels(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        X, J, H = self._derivatives(x)
        gam = self.ambient.christoffels(X)
        rhs = H + np.einsum("kij,ia,jb->kab", gam, J, J)
        dim = self.dim
        out = np.linalg.solve(J, rhs.reshape(dim, dim * dim)).reshape(dim, dim, dim)
        return 0.5 * (out + np.transpose(out, (0, 2, 1)))

    def christoffels_from_metric(self, x: Sequence[float]) -> np.ndarray:
        """Same symbols, computed from the pulled-back ``G`` and ``dG`` (cross-check)."""
        return christoffels_from(*self.metric_at(x))

    def as_dict(self) -> dict:
        return {
            "ts": self.ts.tolist(),
            "sigma": self.sigma.tolist(),
            "frames": self.frames.tolist(),
            "eps": self.eps,
            "fd_step": self.fd_step,
            "parallel": self.parallel,
        }


def build_fermi_chart(
    chart,
    p: Sequence[float],
    v_null: Sequence[float],
    t_span=(-0.1, 1.1),
    eps: float = 0.5,
    step: float = DEFAULT_STEP,
    fd_step: float | None = None,
    exp_step: float = 0.1,
    parallel: bool = True,
) -> FermiChart:
    """Integrate ``sigma`` from ``p`` with ``sigma'(0) = v_null`` and transport a null frame.

    ``t_span`` must contain 0. With ``parallel=False`` the initial frame is
    kept with constant components instead of being transported (a negative
    control for :func:`verify_fermi`).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (min(t0, t1) <= 0.0 <= max(t0, t1)):
        raise FermiError("t_span must contain 0")
    if eps <= 0:
        raise FermiError("eps must be positive")
    fd_step = eps / 50.0 if fd_step is None else float(fd_step)
    frame = null_frame_at(chart, p, v_null)
    p = np.asarray(p, dtype=float)
    v = frame.vectors[0]
    pieces = []
    for end in (t0, t1):
        count = max(1, int(round(abs(end) / step)))
        ts = np.linspace(0.0, end, count + 1)
        W0 = frame.vectors if parallel else None
        xs, vs, Ws = transport_system(chart, p, v, W0, ts)
        if Ws is None:
            Ws = np.broadcast_to(frame.vectors, (len(ts),) + frame.vectors.shape).copy()
        pieces.append((ts, xs, vs, Ws))
    (ta, xa, va, Wa), (tb, xb, vb, Wb) = pieces
    ts = np.concatenate([ta[::-1], tb[1:]])
    xs = np.concatenate([xa[::-1], xb[1:]])
    vs = np.concatenate([va[::-1], vb[1:]])
    Ws = np.concatenate([Wa[::-1], Wb[1:]])
    return FermiChart(chart, ts, xs, vs, Ws, float(eps), fd_step, exp_step, parallel, step)


@dataclass
class FermiReport:
    t_samples: list
    a1: float  # max |Phi(t, 0) - sigma(t)|
    a2: float  # max |G - diag(-1, 1, ..., 1)| along sigma
    a3: float  # max |Gamma'| along sigma
    frame: float  # max deviation of the transported frame's Gram matrix from the null pattern
    velocity: float  # max |sigma'(t) - E_0(t)|
    a2_samples: list
    a3_samples: list
    fd_step: float
    parallel: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_fermi(fc: FermiChart, t_samples: Sequence[float], fd_step: float | None = None) -> FermiReport:
    """Residuals of the Fermi properties at ``sigma(t)`` for each ``t`` in ``t_samples``."""
    if fd_step is not None:
        fc = FermiChart(
            fc.ambient, fc.ts, fc.sigma, fc.velocity, fc.frames, fc.eps, float(fd_step),
            fc.exp_step, fc.parallel, fc.step,
        )
    if 2 * fc.fd_step >= fc.eps:
        raise FermiError(f"fd_step {fc.fd_step} too large for the box of half-width {fc.eps}")
    eta = np.diag([-1.0] + [1.0] * fc.n)
    pattern = null_pattern(fc.dim)
    a1 = a2 = a3 = frame_def = vel_def = 0.0
    a2s, a3s = [], []
    for t in t_samples:
        t = float(t)
        x = fc.axis_point(t)
        try:
            base, vel, E = fc.frame_at(t)
            X = fc.psi(x)
            G, _ = fc.metric_at(x)
            gam = fc.christoffels(x)
        except GeodesicError as exc:
            raise FermiError(f"propagation failed at t = {t}: {exc}") from exc
        g, _ = fc.ambient.metric_at(base)
        a1 = max(a1, float(np.max(np.abs(X - base))))
        r2 = float(np.max(np.abs(G - eta)))
        r3 = float(np.max(np.abs(gam)))
        a2s.append(r2)
        a3s.append(r3)
        a2, a3 = max(a2, r2), max(a3, r3)
        frame_def = max(frame_def, float(np.max(np.abs(E @ g @ E.T - pattern))))
        vel_def = max(vel_def, float(np.max(np.abs(vel - E[0]))))
    return FermiReport(
        [float(t) for t in t_samples], a1, a2, a3, frame_def, vel_def, a2s, a3s, fc.fd_step, fc.parallel
    )


def jacobian_sign_check(fc: FermiChart, points: Sequence[Sequence[float]]) -> tuple[bool, float]:
    """Sign of ``det d(Psi)`` on ``points`` (Fermi coordinates).

    Returns ``(constant_sign, min |det|)``; a constant sign on a connected
    sample box indicates local injectivity.
    """
    dets = []
    for x in points:
        x = np.asarray(x, dtype=float)
        J = _central(fc.psi, x, fc.fd_step)
        dets.append(float(np.linalg.det(J)))
    dets = np.array(dets)
    return bool(np.all(dets > 0) or np.all(dets < 0)), float(np.min(np.abs(dets)))
