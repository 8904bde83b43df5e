from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from causal_locus.cli import load_spec, main

F1 = "y + x^2 + x^3 + y*x^4"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out), err


def write_spec(tmp_path: Path, text: str, name: str = "spec.toml") -> str:
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestExamples:
    def test_lists_catalog(self, capsys):
        code, rep, _ = run_json(capsys, "examples")
        assert code == 0 and rep["schema"] == "causal-locus.report" and rep["schema_version"] == 1
        entries = rep["result"]["entries"]
        assert [e["id"] for e in entries] == ["F1", "F2", "F3", "kobayashi", "lightcone", "lightplane", "perturbed"]
        assert all(e["self_check"] < 1e-11 for e in entries)

    def test_text_listing(self, capsys):
        code, out, _ = run(capsys, "examples")
        assert code == 0
        assert len(out.splitlines()) == 8 and "kobayashi" in out and "(x + 1)*tanh(y)" in out


class TestAnalyze:
    def test_text_lists_every_point(self, capsys):
        code, out, _ = run(capsys, "analyze", "--spec", "examples:F3", "--point=0.1,0", "--point=-0.2,0.1")
        lines = out.splitlines()
        assert code == 0 and len(lines) == 3
        assert lines[2].startswith("  p = [-0.2, 0.1]: timelike")

    def test_f1_origin(self, capsys):
        code, rep, _ = run_json(capsys, "analyze", "--spec", "examples:F1")
        assert code == 0 and rep["verdict"] == "lightlike_degenerate"
        assert rep["result"]["B"] == 0.0 and rep["result"]["H"] is None

    def test_kobayashi_origin(self, capsys):
        code, rep, _ = run_json(capsys, "analyze", "--spec", "examples:kobayashi")
        assert code == 0 and rep["verdict"] == "lightlike_nondegenerate"

    def test_multiple_points(self, capsys):
        code, rep, _ = run_json(capsys, "analyze", "--spec", "examples:F1", "--point", "1,0", "--point", "1,1")
        pts = rep["result"]["points"]
        assert code == 0 and [p["B"] for p in pts] == [-28.0, pytest.approx(-84.0)]
        assert rep["verdict"] == ["timelike", "timelike"]

    def test_toml_spec_with_metric(self, capsys, tmp_path):
        spec = write_spec(
            tmp_path,
            '[surface]\nname = "tilted"\nn = 2\nf = "y + 0.1*x^2"\n\n[metric]\nkind = "generic"\ng12 = "0.1*x1^2"\n',
        )
        code, rep, _ = run_json(capsys, "analyze", "--spec", spec, "--point", "0.2,0.1")
        assert code == 0 and rep["result"]["path"] == "general"
        assert rep["inputs"]["metric"] == {"kind": "generic", "g12": "0.1*x1^2"}

    def test_text_output(self, capsys):
        code, out, _ = run(capsys, "analyze", "--spec", "examples:F1", "--point", "1,0")
        assert code == 0 and out.startswith("analyze: verdict = timelike")

    def test_report_file_and_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "analyze", "--spec", "examples:F2", "--point", "0.3,-0.2", "--out", str(a))
        run(capsys, "analyze", "--spec", "examples:F2", "--point", "0.3,-0.2", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert "wall_clock_s" not in json.loads(a.read_text())

    def test_timing_flag(self, capsys):
        _, rep, _ = run_json(capsys, "analyze", "--spec", "examples:F1", "--timing")
        assert rep["wall_clock_s"] >= 0.0


class TestErrors:
    def test_malformed_expression(self, capsys, tmp_path):
        spec = write_spec(tmp_path, '[surface]\nn = 2\nf = "sqrt(1 + x*x"\n')
        code, out, err = run(capsys, "analyze", "--spec", spec)
        rep = json.loads(out)
        assert code == 2 and rep["error"]["kind"] == "parse" and rep["error"]["offset"] == 12
        assert "parse error" in err

    def test_malformed_toml(self, capsys, tmp_path):
        spec = write_spec(tmp_path, "[surface\nn = 2\n")
        assert run(capsys, "analyze", "--spec", spec)[0] == 2

    def test_unknown_example(self, capsys):
        code, out, _ = run(capsys, "analyze", "--spec", "examples:F9")
        assert code == 3 and json.loads(out)["error"]["type"] == "CatalogError"

    @pytest.mark.parametrize(
        "text",
        [
            '[surface]\nn = 2\nf = "y"\ncolour = "red"\n',
            '[surface]\nn = 2\nf = "y"\n[params]\nbogus = 1\n',
            '[surface]\nn = 2\nf = "y"\n[extra]\n',
            '[surface]\nn = 2\n',
            '[surface]\nf = "y"\n',
            '[surface]\nn = 2\nf = "y"\nexample = "F1"\n',
            '[surface]\nn = 2\nf = "y"\n[metric]\nkind = "wormhole"\n',
            '[surface]\nn = 2\nf = "y"\n[metric]\nkind = "minkowski"\ng12 = "x1"\n',
            '[surface]\nn = 3\nf = "x3"\n[metric]\nkind = "perturbed"\n',
        ],
    )
    def test_validation_errors(self, capsys, tmp_path, text):
        spec = write_spec(tmp_path, text)
        assert run(capsys, "analyze", "--spec", spec)[0] == 3

    def test_bad_point(self, capsys):
        assert run(capsys, "analyze", "--spec", "examples:F1", "--point", "1,2,3")[0] == 3
        assert run(capsys, "analyze", "--spec", "examples:F1", "--point", "a,b")[0] == 3

    def test_numeric_failure(self, capsys, tmp_path):
        spec = write_spec(tmp_path, '[surface]\nn = 2\nf = "log(x)"\n')
        code, out, _ = run(capsys, "analyze", "--spec", spec, "--point=-1,0")
        assert code == 4 and json.loads(out)["error"]["kind"] == "numeric"

    def test_precondition_failure(self, capsys):
        code, out, _ = run(capsys, "verify", "lightline", "--spec", "examples:kobayashi")
        assert code == 3 and json.loads(out)["error"]["type"] == "PreconditionError"

    def test_missing_spec_file(self, capsys, tmp_path):
        assert run(capsys, "analyze", "--spec", str(tmp_path / "none.toml"))[0] == 3

    def test_thread_env_validated(self, capsys, monkeypatch):
        monkeypatch.setenv("CAUSAL_LOCUS_THREADS", "zero")
        assert run(capsys, "analyze", "--spec", "examples:F1")[0] == 3


class TestVerify:
    def test_lightline_f3(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "lightline", "--spec", "examples:F3")
        assert code == 0 and rep["verdict"] == "pass" and rep["result"]["max_residual"] < 1e-12

    def test_lightline_csv(self, capsys, tmp_path):
        out = tmp_path / "line.csv"
        run(capsys, "verify", "lightline", "--spec", "examples:F1", "--half-length", "0.1", "--csv", str(out))
        rows = list(csv.DictReader(out.open()))
        assert list(rows[0]) == ["t", "x0", "x1", "x2", "B", "cls"]
        assert len(rows) == 201 and {r["cls"] for r in rows} == {"lightlike_degenerate"}
        assert float(rows[0]["t"]) == pytest.approx(-0.1)

    def test_dichotomy_kobayashi(self, capsys, tmp_path):
        out = tmp_path / "locus.csv"
        code, rep, _ = run_json(capsys, "verify", "dichotomy", "--spec", "examples:kobayashi", "--csv", str(out))
        assert code == 0 and rep["verdict"] == "a"
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == rep["result"]["locus_samples"]
        assert max(abs(float(r["B"])) for r in rows) < 1e-10

    def test_dichotomy_f1(self, capsys):
        assert run_json(capsys, "verify", "dichotomy", "--spec", "examples:F1")[1]["verdict"] == "b"

    def test_prop41_cone(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "prop41", "--spec", "examples:lightcone", "--point", "0.3,0.2")
        assert code == 0 and rep["verdict"] == "pass"

    def test_prop32(self, capsys, tmp_path):
        spec = write_spec(
            tmp_path,
            '[surface]\nn = 3\nf = "x3"\n\n[params]\nc = { "11" = "1 + x3", "12" = "x3^2", "22" = "-2" }\n',
        )
        code, rep, _ = run_json(capsys, "verify", "prop32", "--spec", spec)
        assert code == 0 and rep["verdict"] == "pass" and rep["result"]["max"] < 1e-10

    def test_theorem_d(self, capsys):
        assert run_json(capsys, "verify", "theoremD", "--spec", "examples:F3")[1]["verdict"] == "bounded"
        assert run_json(capsys, "verify", "theoremD", "--spec", "examples:F2")[1]["verdict"] == "unbounded"

    def test_fermi_minkowski(self, capsys, tmp_path):
        spec = write_spec(tmp_path, '[surface]\nn = 2\nf = "y"\n\n[params]\nt_samples = [0.0, 0.5, 1.0]\n')
        code, rep, _ = run_json(capsys, "verify", "fermi", "--spec", spec)
        assert code == 0 and rep["verdict"] == "pass"
        assert rep["result"]["tolerances"] == {"a2": 1e-10, "a3": 1e-10}

    def test_failing_check_still_exits_zero(self, capsys):
        code, rep, _ = run_json(capsys, "verify", "lightline", "--spec", "examples:F1", "--tol", "0")
        assert code == 0 and rep["verdict"] == "fail"


class TestBuild:
    def test_cone_series_file(self, capsys, tmp_path):
        out = tmp_path / "cone.json"
        code, rep, _ = run_json(
            capsys, "build", "lightlike", "--lambda", "sqrt(1 + x1^2) - 1", "--order", "10", "--series-out", str(out)
        )
        assert code == 0 and rep["verdict"] == "pass" and rep["result"]["residual"]["max_abs"] < 1e-11
        spec = write_spec(tmp_path, '[surface]\nseries = "cone.json"\n')
        code, rep, _ = run_json(capsys, "analyze", "--spec", spec, "--point", "0.1,0.05")
        assert code == 0 and abs(rep["result"]["B"]) < 1e-8

    def test_kobayashi_inline(self, capsys):
        code, rep, _ = run_json(capsys, "build", "admissible", "--eta1", "x1")
        assert code == 0 and rep["result"]["series"]["order"] == 12
        assert rep["result"]["residual"]["max_abs"] < 1e-10

    def test_domain_error(self, capsys):
        assert run(capsys, "build", "lightlike", "--lambda", "2*x1")[0] == 4

    def test_missing_lambda(self, capsys):
        assert run(capsys, "build", "lightlike")[0] == 3

    def test_series_relative_to_spec_dir(self, capsys, tmp_path):
        sub = tmp_path / "sub"
        sub.mkdir()
        run(capsys, "build", "lightlike", "--lambda", "0", "--order", "4", "--series-out", str(sub / "p.json"))
        spec = load_spec(write_spec(sub, '[surface]\nseries = "p.json"\n'))
        assert spec.n == 2 and spec.surface.height.value([0.3, 0.4]) == pytest.approx(0.4)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "causal_locus", "analyze", "--spec", "examples:F1", "--json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdict"] == "lightlike_degenerate"
    assert proc.stderr == ""
