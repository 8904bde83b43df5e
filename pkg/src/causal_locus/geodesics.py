"""Fixed-step RK4 geodesics and parallel transport in a chart."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metric import MetricError

__all__ = [
    "CurveSample",
    "GeodesicError",
    "geodesic_ivp",
    "null_defect",
    "energy_drift",
    "parallel_transport",
    "transport_system",
    "exp_map",
    "curve_acceleration",
    "DEFAULT_STEP",
]

DEFAULT_STEP = 1e-3


class GeodesicError(RuntimeError):
    """Integration failed; ``last_t`` is the last parameter reached."""

    def __init__(self, message: str, last_t: float):
        super().__init__(f"{message} (last good t = {last_t:.6g})")
        self.last_t = last_t


@dataclass(frozen=True)
class CurveSample:
    t: float
    x: np.ndarray
    v: np.ndarray


def _grid(t0: float, t1: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    count = max(1, int(round(abs(t1 - t0) / step)))
    return np.linspace(t0, t1, count + 1)


def _rhs(chart, x: np.ndarray, v: np.ndarray, W: np.ndarray | None):
    gam = chart.christoffels(x)
    acc = -np.einsum("cab,a,b->c", gam, v, v)
    if W is None:
        return v, acc, None
    # W holds transported vectors as rows
    dW = -np.einsum("cab,a,kb->kc", gam, v, W)
    return v, acc, dW


def _rk4_step(chart, x, v, W, h):
    k1x, k1v, k1w = _rhs(chart, x, v, W)
    k2x, k2v, k2w = _rhs(chart, x + 0.5 * h * k1x, v + 0.5 * h * k1v, None if W is None else W + 0.5 * h * k1w)
    k3x, k3v, k3w = _rhs(chart, x + 0.5 * h * k2x, v + 0.5 * h * k2v, None if W is None else W + 0.5 * h * k2w)
    k4x, k4v, k4w = _rhs(chart, x + h * k3x, v + h * k3v, None if W is None else W + h * k3w)
    xn = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    vn = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    Wn = None if W is None else W + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
    return xn, vn, Wn


def transport_system(chart, x0, v0, W0, ts: np.ndarray):
    """Integrate geodesic and transported rows ``W0`` over the grid ``ts``.

    Returns arrays ``xs``, ``vs`` and (if ``W0`` given) ``Ws``.
    """
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    W = None if W0 is None else np.atleast_2d(np.asarray(W0, dtype=float)).copy()
    xs = [x]
    vs = [v]
    Ws = [W]
    minkowski = chart.is_minkowski
    for k in range(len(ts) - 1):
        h = ts[k + 1] - ts[k]
        if minkowski:
            x = x0 + (ts[k + 1] - ts[0]) * np.asarray(v0, dtype=float)
        else:
            try:
                x, v, W = _rk4_step(chart, x, v, W, h)
            except (MetricError, np.linalg.LinAlgError) as exc:
                raise GeodesicError(f"metric failure: {exc}", float(ts[k])) from exc
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
                raise GeodesicError("integration produced non-finite values", float(ts[k]))
        xs.append(x)
        vs.append(v)
        Ws.append(W)
    return np.array(xs), np.array(vs), (None if W0 is None else np.array(Ws))


def geodesic_ivp(
    chart, x0: Sequence[float], v0: Sequence[float], t_span=(0.0, 1.0), step: float = DEFAULT_STEP
) -> list[CurveSample]:
    """Affinely parametrised geodesic with ``x(t_span[0]) = x0``, ``x'(t_span[0]) = v0``.

    ``t_span[1]`` may be smaller than ``t_span[0]`` to integrate backwards.
    Minkowski charts return the straight line exactly.
    """
    ts = _grid(float(t_span[0]), float(t_span[1]), step)
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if x0.shape != (chart.dim,) or v0.shape != (chart.dim,):
        raise ValueError(f"x0 and v0 must have {chart.dim} components")
    if chart.is_minkowski:
        return [CurveSample(float(t), x0 + (t - ts[0]) * v0, v0.copy()) for t in ts]
    xs, vs, _ = transport_system(chart, x0, v0, None, ts)
    return [CurveSample(float(t), x, v) for t, x, v in zip(ts, xs, vs)]


def _curve_step(curve: list[CurveSample]) -> float:
    if len(curve) < 2:
        return 0.0
    return curve[1].t - curve[0].t


def null_defect(chart, curve: list[CurveSample]) -> float:
    """Largest ``|g(v, v)|`` over the samples."""
    if not curve:
        raise ValueError("empty curve")
    return max(abs(chart.inner(s.x, s.v, s.v)) if hasattr(chart, "inner") else abs(_inner(chart, s.x, s.v, s.v)) for s in curve)


def _inner(chart, x, u, v) -> float:
    g, _ = chart.metric_at(x)
    return float(np.asarray(u) @ g @ np.asarray(v))


def energy_drift(chart, curve: list[CurveSample]) -> float:
    """Largest change of ``g(v, v)`` relative to the first sample."""
    e0 = _inner(chart, curve[0].x, curve[0].v, curve[0].v)
    return max(abs(_inner(chart, s.x, s.v, s.v) - e0) for s in curve)


def parallel_transport(chart, curve: list[CurveSample], V0) -> np.ndarray:
    """Transport ``V0`` (a vector or rows of vectors) along a geodesic sample grid.

    The geodesic is re-integrated from its first sample together with the
    transported vectors, so the result is defined on exactly ``curve``'s grid.
    Returns an array of shape ``(len(curve), dim)`` or ``(len(curve), k, dim)``.
    """
    V0 = np.asarray(V0, dtype=float)
    single = V0.ndim == 1
    ts = np.array([s.t for s in curve])
    if chart.is_minkowski:
        W = np.broadcast_to(np.atleast_2d(V0), (len(ts),) + np.atleast_2d(V0).shape).copy()
    else:
        _, _, W = transport_system(chart, curve[0].x, curve[0].v, np.atleast_2d(V0), ts)
    return W[:, 0, :] if single else W


def exp_map(chart, p: Sequence[float], v: Sequence[float], step: float = DEFAULT_STEP) -> np.ndarray:
    """Endpoint of the unit-time geodesic from ``p`` with velocity ``v``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if chart.is_minkowski or not np.any(v):
        return p + v
    ts = _grid(0.0, 1.0, step)
    x, w = p.copy(), v.copy()
    for k in range(len(ts) - 1):
        try:
            x, w, _ = _rk4_step(chart, x, w, None, ts[k + 1] - ts[k])
        except (MetricError, np.linalg.LinAlgError) as exc:
            raise GeodesicError(f"metric failure: {exc}", float(ts[k])) from exc
    return x


def curve_acceleration(chart, curve: list[CurveSample], t: float) -> np.ndarray:
    """Covariant acceleration ``dv/dt + Gamma(v, v)`` at an interior sample."""
    ts = np.array([s.t for s in curve])
    k = int(np.argmin(np.abs(ts - t)))
    h = _curve_step(curve)
    if h == 0.0 or abs(ts[k] - t) > 1e-9 * max(1.0, abs(h)):
        raise ValueError(f"t = {t} is not on the sample grid")
    if k == 0 or k == len(curve) - 1:
        raise ValueError("acceleration needs an interior sample (t at grid boundary)")
    dv = (curve[k + 1].v - curve[k - 1].v) / (ts[k + 1] - ts[k - 1])
    gam = chart.christoffels(curve[k].x)
    return dv + np.einsum("cab,a,b->c", gam, curve[k].v, curve[k].v)
