"""Causal type, mean curvature and light-like geodesics of graph hypersurfaces
in Lorentzian manifolds."""

from __future__ import annotations

__version__ = "0.1.0"

from .expr import parse
from .hypersurface import CausalClass, GraphSurface, graph, point_report
from .metric import MetricChart, minkowski, perturbed_metric

__all__ = [
    "__version__",
    "parse",
    "CausalClass",
    "GraphSurface",
    "graph",
    "point_report",
    "MetricChart",
    "minkowski",
    "perturbed_metric",
]
