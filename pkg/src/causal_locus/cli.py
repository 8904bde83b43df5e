"""Command-line front end.

Subcommands: ``examples``, ``analyze``, ``verify`` and ``build``. A surface
is given with ``--spec``, either ``examples:ID`` or a TOML file::

    [surface]
    name = "my surface"
    n = 2
    f = "y + x^2 + x^3 + y*x^4"      # or: series = "cone.json", or: example = "F1"

    [metric]
    kind = "generic"                 # "minkowski" (default), "generic" or "perturbed"
    g12 = "0.1*x1^2"

    [params]
    point = [0.0, 0.0]

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numeric failure.
Reports go to stdout (JSON with ``--json``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import enum
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import tomli

from . import __version__
from .catalog import CATALOG, CatalogError
from .catalog import get as get_example
from .cksolver import SolverError, build_admissible, build_lightlike, dump_series, load_series, series_residual
from .expr import ExprError, ExprEvalError, ExprSyntaxError
from .fermi import FermiError, build_fermi_chart, verify_fermi
from .geodesics import GeodesicError
from .hypersurface import (
    GraphSurface,
    PreconditionError,
    SeriesHeight,
    SurfaceError,
    graph,
    point_report,
)
from .jets import JetDomainError
from .locus import (
    LocusError,
    dichotomy_check,
    null_direction_curve,
    prop32_reference_check,
    prop41_check,
    theorem_d_check,
    verify_lightline,
)
from .metric import MetricChart, MetricError, minkowski, perturbed_metric
from .parallel import sweep

__all__ = ["main", "build_parser", "load_spec", "SurfaceSpec", "SpecError", "REPORT_SCHEMA"]

REPORT_SCHEMA = "causal-locus.report"
REPORT_SCHEMA_VERSION = 1

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4

CHECKS = ("lightline", "dichotomy", "prop41", "prop32", "theoremD", "fermi")

_SURFACE_KEYS = {"name", "n", "f", "series", "example"}
_METRIC_KEYS = {"kind", "eps"}
_PARAM_KEYS = {
    "point", "tol_grad", "tol_B", "step", "half_length", "order", "radii", "length",
    "trace_length", "base_point", "v_null", "t_span", "eps", "fd_step", "t_samples",
    "c", "xn_max", "grid_points",
}


class SpecError(ValueError):
    """The surface specification is malformed or inconsistent."""


# ---------------------------------------------------------------------------
# spec ingestion


@dataclass
class SurfaceSpec:
    name: str
    n: int
    surface: GraphSurface
    source: str
    metric: dict
    params: dict = field(default_factory=dict)
    expect: str | None = None

    def inputs(self) -> dict:
        return {"spec": self.source, "name": self.name, "n": self.n, "metric": self.metric, "params": self.params}


def _metric_from_table(table: dict, n: int):
    unknown = set(table) - _METRIC_KEYS - {k for k in table if k.startswith("g")}
    if unknown:
        raise SpecError(f"unknown keys in [metric]: {sorted(unknown)}")
    kind = table.get("kind", "minkowski")
    comps = {k: v for k, v in table.items() if k.startswith("g")}
    if kind == "minkowski":
        if comps or "eps" in table:
            raise SpecError("a minkowski metric takes no components")
        return minkowski(n), {"kind": "minkowski"}
    if kind == "perturbed":
        if comps:
            raise SpecError("the perturbed metric takes only 'eps'")
        if n != 2:
            raise SpecError("the perturbed metric is 3-dimensional (n = 2)")
        eps = float(table.get("eps", 0.1))
        return perturbed_metric(eps), {"kind": "perturbed", "eps": eps}
    if kind == "generic":
        if "eps" in table:
            raise SpecError("'eps' only applies to kind = \"perturbed\"")
        if not all(isinstance(v, (str, int, float)) for v in comps.values()):
            raise SpecError("metric components must be expression strings")
        try:
            chart = MetricChart.from_strings(n + 1, {k: str(v) for k, v in comps.items()})
        except ExprError:
            raise
        except ValueError as exc:  # bad component keys
            raise SpecError(str(exc)) from exc
        return chart, {"kind": "generic", **{k: str(v) for k, v in sorted(comps.items())}}
    raise SpecError(f"unknown metric kind {kind!r}")


def load_spec(text: str, base_dir: Path | None = None) -> SurfaceSpec:
    """Build a :class:`SurfaceSpec` from ``examples:ID`` or a path to a TOML file."""
    if text.startswith("examples:"):
        e = get_example(text.split(":", 1)[1])
        return SurfaceSpec(
            e.id, e.n, e.surface(), text, {"kind": e.metric}, {"point": list(e.point)}, e.expect
        )
    path = Path(text)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {text!r}: {exc}") from exc
    doc = tomli.loads(raw)
    unknown = set(doc) - {"surface", "metric", "params"}
    if unknown:
        raise SpecError(f"unknown tables or keys: {sorted(unknown)}")
    surf = doc.get("surface")
    if not isinstance(surf, dict):
        raise SpecError("missing [surface] table")
    bad = set(surf) - _SURFACE_KEYS
    if bad:
        raise SpecError(f"unknown keys in [surface]: {sorted(bad)}")
    params = doc.get("params", {})
    bad = set(params) - _PARAM_KEYS
    if bad:
        raise SpecError(f"unknown keys in [params]: {sorted(bad)}")
    sources = [k for k in ("f", "series", "example") if k in surf]
    if len(sources) != 1:
        raise SpecError("[surface] needs exactly one of 'f', 'series', 'example'")
    kind = sources[0]
    expect = None
    if kind == "example":
        if "metric" in doc:
            raise SpecError("an example surface brings its own metric")
        e = get_example(str(surf["example"]))
        n = e.n
        surface = e.surface()
        mdesc = {"kind": e.metric}
        params = {"point": list(e.point), **params}
        expect = e.expect
    elif kind == "series":
        spath = Path(str(surf["series"]))
        if not spath.is_absolute():
            spath = (base_dir if base_dir is not None else path.parent) / spath
        try:
            s = load_series(spath.read_text())
        except OSError as exc:
            raise SpecError(f"cannot read series file {str(spath)!r}: {exc}") from exc
        n = s.n
        if "n" in surf and int(surf["n"]) != n:
            raise SpecError(f"n = {surf['n']} does not match the series (n = {n})")
        chart, mdesc = _metric_from_table(doc.get("metric", {}), n)
        if not chart.is_minkowski:
            raise SpecError("series surfaces are built in Minkowski space only")
        surface = GraphSurface(SeriesHeight(s.f), chart)
    else:
        if "n" not in surf:
            raise SpecError("[surface] needs 'n'")
        n = int(surf["n"])
        if n < 1:
            raise SpecError("n must be positive")
        chart, mdesc = _metric_from_table(doc.get("metric", {}), n)
        surface = graph(str(surf["f"]), n, chart)
    name = str(surf.get("name", path.stem))
    return SurfaceSpec(name, n, surface, text, mdesc, dict(params), expect)


def _parse_point(text: str, n: int) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise SpecError(f"bad point {text!r}; expected comma-separated numbers") from None
    if len(vals) != n:
        raise SpecError(f"point {text!r} has {len(vals)} coordinates, expected {n}")
    return vals


def _points(args, spec: SurfaceSpec) -> list[list[float]]:
    if args.point:
        return [_parse_point(p, spec.n) for p in args.point]
    p = spec.params.get("point")
    if p is None:
        return [[0.0] * spec.n]
    if len(p) != spec.n:
        raise SpecError(f"params.point has {len(p)} coordinates, expected {spec.n}")
    return [[float(v) for v in p]]


# ---------------------------------------------------------------------------
# reports


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else None
    if hasattr(v, "as_dict"):
        return _jsonable(v.as_dict())
    return v


def make_report(command: str, inputs: dict, result: Any, verdict: Any) -> dict:
    rep = {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "result": result,
        "verdict": verdict,
        "versions": {
            "causal_locus": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    return _jsonable(rep)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def _text_summary(report: dict) -> str:
    lines = [f"{report['command']}: verdict = {report['verdict']}"]
    res = report.get("result")
    if isinstance(res, dict):
        for k in sorted(res):
            v = res[k]
            if isinstance(v, (int, float, str, bool)) or v is None:
                lines.append(f"  {k} = {v}")
        for r in res.get("points", []):
            lines.append(f"  p = {r['p']}: {r['cls']}, B = {r['B']:.6g}, A = {r['A']:.6g}, H = {r['H']}")
        for e in res.get("entries", []):
            lines.append(f"  {e['id']:<11} f = {e['f']:<28} metric = {e['metric']:<10} {e['title']}")
    return "\n".join(lines)


def _write_csv(path: str, rows: list[dict], n: int) -> None:
    cols = ["t"] + [f"x{i}" for i in range(n + 1)] + ["B", "cls"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in cols})


def _surface_rows(F: GraphSurface, ts, domain_pts) -> list[dict]:
    rows = []
    for t, p in zip(ts, domain_pts):
        r = point_report(F, p)
        X = F.point(p)
        row = {"t": repr(float(t)), "B": repr(float(r.B)), "cls": r.cls.value}
        row.update({f"x{i}": repr(float(X[i])) for i in range(len(X))})
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# commands


def cmd_examples(args) -> tuple[dict, int]:
    entries = []
    for eid in CATALOG:
        e = get_example(eid)
        d = e.as_dict()
        d["self_check"] = e.self_check()
        entries.append(d)
    return make_report("examples", {}, {"entries": entries}, "ok"), EXIT_OK


def cmd_analyze(args) -> tuple[dict, int]:
    spec = load_spec(args.spec)
    pts = _points(args, spec)
    tol_grad = args.tol if args.tol is not None else float(spec.params.get("tol_grad", 1e-8))
    tol_B = spec.params.get("tol_B")
    reps = sweep(lambda p: point_report(spec.surface, p, tol_B=tol_B, tol_grad=tol_grad), pts)
    result = {"points": [r.as_dict() for r in reps]}
    verdict = [r.cls.value for r in reps]
    if len(verdict) == 1:
        result = result["points"][0]
        verdict = verdict[0]
    return make_report("analyze", spec.inputs(), result, verdict), EXIT_OK


def _fparam(args, spec: SurfaceSpec, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return spec.params.get(name, default)


def cmd_verify(args) -> tuple[dict, int]:
    spec = load_spec(args.spec)
    F = spec.surface
    o = _points(args, spec)[0]
    step = args.step
    check = args.check
    inputs = {**spec.inputs(), "check": check, "point": o}
    rows = None
    if check == "lightline":
        half = float(_fparam(args, spec, "half_length", 0.5))
        rep = verify_lightline(
            F, o, half_length=half, step=step or float(spec.params.get("step", 1e-3)),
            tol=args.tol if args.tol is not None else 1e-12,
        )
        result, verdict = rep.as_dict(), "pass" if rep.verdict else "fail"
        if args.csv:
            rows = []
            for t, X in zip(rep.ts, rep.points):
                pr = point_report(rep.surface, X[1:])
                row = {"t": repr(float(t)), "B": repr(float(pr.B)), "cls": pr.cls.value}
                row.update({f"x{i}": repr(float(X[i])) for i in range(len(X))})
                rows.append(row)
    elif check == "dichotomy":
        rep = dichotomy_check(
            F, o, tol_grad=args.tol if args.tol is not None else float(spec.params.get("tol_grad", 1e-8)),
            half_length=float(_fparam(args, spec, "half_length", 0.5)),
            trace_length=float(spec.params.get("trace_length", 0.2)),
            trace_step=step or 1e-2,
        )
        result, verdict = rep.as_dict(), rep.case
        if args.csv and rep.locus is not None:
            rows = _surface_rows(F, rep.locus.arclength, rep.locus.points)
    elif check == "prop41":
        length = float(spec.params.get("length", 0.2))
        ts, pts = null_direction_curve(F, o, length=length, step=step or 1e-2)
        rep = prop41_check(F, ts, pts, tol=args.tol if args.tol is not None else 1e-8)
        result = rep.as_dict()
        verdict = "pass" if rep.max_defect < 1e-8 else "fail"
        if args.csv:
            rows = _surface_rows(F, ts, pts)
    elif check == "prop32":
        c = spec.params.get("c")
        if not isinstance(c, dict) or not c:
            raise SpecError('prop32 needs a [params.c] table such as c = { "11" = "1 + x2" }')
        cc = {}
        for key, val in c.items():
            if len(key) != 2 or not key.isdigit():
                raise SpecError(f"bad coefficient key {key!r}; use two digits 'jk'")
            cc[(int(key[0]), int(key[1]))] = str(val)
        xmax = float(spec.params.get("xn_max", 0.4))
        m = int(spec.params.get("grid_points", 9))
        rep = prop32_reference_check(F.ambient, cc, np.linspace(-xmax, xmax, m), spec.n)
        tol = args.tol if args.tol is not None else 1e-10
        result, verdict = rep.as_dict(), "pass" if rep.max() < tol else "fail"
    elif check == "theoremD":
        radii = spec.params.get("radii", (0.1, 0.05, 0.025))
        rep = theorem_d_check(F, o, radii=radii, half_length=float(_fparam(args, spec, "half_length", 0.5)))
        result, verdict = rep.as_dict(), rep.status
    elif check == "fermi":
        chart = F.ambient
        base = spec.params.get("base_point", [0.0] * chart.dim)
        v_null = spec.params.get("v_null", [1.0, 1.0] + [0.0] * (chart.dim - 2))
        t_span = spec.params.get("t_span", (-0.1, 1.1))
        eps = float(spec.params.get("eps", 0.5))
        fd_step = spec.params.get("fd_step")
        t_samples = spec.params.get("t_samples", np.linspace(0.0, 1.0, 11).tolist())
        fc = build_fermi_chart(chart, base, v_null, t_span=t_span, eps=eps, step=step or 1e-3, fd_step=fd_step)
        rep = verify_fermi(fc, t_samples)
        tol2, tol3 = (1e-10, 1e-10) if chart.is_minkowski else (1e-6, 1e-5)
        result = rep.as_dict()
        result["tolerances"] = {"a2": tol2, "a3": tol3}
        inputs.update({"base_point": base, "v_null": v_null, "t_span": list(t_span), "eps": eps})
        verdict = "pass" if (rep.a2 < tol2 and rep.a3 < tol3) else "fail"
        if args.csv:
            rows = []
            for t, X in zip(fc.ts, fc.sigma):
                rows.append({"t": repr(float(t)), **{f"x{i}": repr(float(X[i])) for i in range(chart.dim)}})
    else:  # pragma: no cover - argparse restricts choices
        raise SpecError(f"unknown check {check!r}")
    if rows is not None:
        _write_csv(args.csv, rows, F.n)
    return make_report("verify", inputs, result, verdict), EXIT_OK


def cmd_build(args) -> tuple[dict, int]:
    order = args.order
    if args.kind == "lightlike":
        if args.lam is None:
            raise SpecError("build lightlike needs --lambda")
        order = order or 10
        s = build_lightlike(args.lam, args.n, order)
        res = series_residual(s, target="lightlike")
        inputs = {"kind": "lightlike", "lambda": args.lam, "n": args.n, "order": order}
    else:
        order = order or 12
        s = build_admissible(args.eta0, args.eta1, args.phi, args.alpha, args.n, order)
        res = series_residual(s, phi=args.phi, alpha=args.alpha, target="admissible")
        inputs = {
            "kind": "admissible", "eta0": args.eta0, "eta1": args.eta1, "phi": args.phi,
            "alpha": args.alpha, "n": args.n, "order": order,
        }
    text = dump_series(s)
    result = {"residual": res.as_dict()}
    if args.out_series:
        Path(args.out_series).write_text(text + "\n")
        result["series_file"] = args.out_series
    else:
        result["series"] = json.loads(text)
    tol = args.tol if args.tol is not None else 1e-10
    verdict = "pass" if res.relative < tol else "fail"
    return make_report("build", inputs, result, verdict), EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-locus",
        description="Causal type, mean curvature and light-like geodesics of graph hypersurfaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--out", help="also write the JSON report to this file")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    common.add_argument("--tol", type=float, help="check tolerance (command specific)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("examples", parents=[common], help="list the builtin catalog")

    p = sub.add_parser("analyze", parents=[common], help="point data: B, A, H, normal, class")
    p.add_argument("--spec", required=True, help="examples:ID or a TOML spec file")
    p.add_argument("--point", action="append", help="comma-separated domain point (repeatable)")

    p = sub.add_parser("verify", parents=[common], help="run a locus or Fermi check")
    p.add_argument("check", choices=CHECKS)
    p.add_argument("--spec", required=True)
    p.add_argument("--point", action="append")
    p.add_argument("--step", type=float, help="integration or continuation step")
    p.add_argument("--half-length", dest="half_length", type=float)
    p.add_argument("--csv", help="write curve samples (t, x0..xn, B, cls) to this file")

    p = sub.add_parser("build", parents=[common], help="construct a series surface")
    p.add_argument("kind", choices=("lightlike", "admissible"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--order", type=int)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--eta0", default="0")
    p.add_argument("--eta1", default="0")
    p.add_argument("--phi", default="0")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--series-out", dest="out_series", help="write the series file here")
    return parser


def _error_report(kind: str, exc: BaseException, code: int) -> dict:
    err = {"kind": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ExprSyntaxError):
        err["offset"] = exc.offset
    return {"schema": REPORT_SCHEMA, "schema_version": REPORT_SCHEMA_VERSION, "error": err}


def _classify_error(exc: BaseException) -> tuple[str, int]:
    if isinstance(exc, (tomli.TOMLDecodeError, ExprSyntaxError)):
        return "parse", EXIT_PARSE
    if isinstance(exc, (JetDomainError, SurfaceError, MetricError, GeodesicError, LocusError, ExprEvalError,
                        FermiError, np.linalg.LinAlgError, ArithmeticError)):
        return "numeric", EXIT_NUMERIC
    if isinstance(exc, (SpecError, CatalogError, PreconditionError, SolverError, ValueError, LookupError, TypeError)):
        return "validation", EXIT_VALIDATION
    raise exc


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"examples": cmd_examples, "analyze": cmd_analyze, "verify": cmd_verify, "build": cmd_build}
    t0 = time.perf_counter()
    try:
        report, code = handlers[args.command](args)
    except Exception as exc:  # mapped to exit codes; anything unexpected re-raises
        kind, code = _classify_error(exc)
        report = _error_report(kind, exc, code)
        print(f"causal-locus: {kind} error: {exc}", file=sys.stderr)
        print(dumps(report))
        return code
    if args.timing:
        report["wall_clock_s"] = time.perf_counter() - t0
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text if args.json else _text_summary(report))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
