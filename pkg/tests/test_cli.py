import json

import pytest

from geolingua.cli import build_parser, main, resolve_config
from geolingua.metrics import build_report
from geolingua.constraints import evaluate
from geolingua.parser import parse
from geolingua.scene import compile_program

from corpus import SCENES
from fake_endpoint import FakeEndpoint

FAST = ["--inner", "200", "--outer", "300", "--restarts", "2"]
VALID_REPLY = json.dumps({"shapes": ["Square(ABCD)"], "dependence": [], "length constraint": [],
                          "angle constraint": ["Angle(ABC,90)"]})


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("GEOLINGUA_API_KEY", "GEOLINGUA_BASE_URL", "GEOLINGUA_MODEL", "GEOLINGUA_ALPHA",
                "GEOLINGUA_INNER", "GEOLINGUA_OUTER", "GEOLINGUA_RESTARTS", "GEOLINGUA_SEED"):
        monkeypatch.delenv(var, raising=False)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_solve_without_constraints(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nPolygon(ABC)\n")
    out = tmp_path / "s.json"
    assert main(["solve", prog, "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["converged"] and doc["final_loss"] == 0.0 and doc["telemetry"]["outer_iterations"] == 0


def test_solve_is_reproducible(tmp_path):
    prog = write(tmp_path, "p.geo", SCENES["midpoints_parallel"])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", prog, "-o", str(a), "--seed", "4", *FAST]) == 0
    assert main(["solve", prog, "-o", str(b), "--seed", "4", *FAST]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_trace_csv(tmp_path):
    prog = write(tmp_path, "p.geo", SCENES["triangle_two_sixty"])
    trace = tmp_path / "t.csv"
    assert main(["solve", prog, "-o", str(tmp_path / "s.json"), "--trace", str(trace), *FAST]) == 0
    rows = trace.read_text().splitlines()
    assert rows[0] == "restart,iteration,best_loss" and len(rows) > 1


def test_strict_unsatisfiable(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,60)\nAngle(ABC,120)\n")
    args = ["solve", prog, "-o", str(tmp_path / "s.json"), "--inner", "50", "--outer", "50", "--restarts", "1"]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 5


def test_compile_error_exit(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nPolygon(ABC)\nCircumscribedPolygon(O,ABCD)\n")
    assert main(["solve", prog]) == 4


def test_parse_error_exit(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nTriangle(ABC)\n")
    assert main(["solve", prog]) == 4
    assert main(["validate", prog]) == 4


def test_missing_file_exit(tmp_path):
    assert main(["solve", str(tmp_path / "nope.geo")]) == 1


def test_validate_ok(tmp_path, capsys):
    prog = write(tmp_path, "p.geo", SCENES["square_with_diagonals"])
    assert main(["validate", prog]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_render_square(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nSquare(ABCD)\n")
    sol, svg = tmp_path / "s.json", tmp_path / "d.svg"
    assert main(["solve", prog, "-o", str(sol)]) == 0
    assert main(["render", str(sol), "-o", str(svg)]) == 0
    assert svg.read_text().count('class="segment"') == 4


def test_render_empty(tmp_path):
    prog = write(tmp_path, "p.geo", "")
    sol = tmp_path / "s.json"
    assert main(["solve", prog, "-o", str(sol)]) == 0
    assert main(["render", str(sol), "-o", str(tmp_path / "d.svg")]) == 6


def test_eval_angle_only(tmp_path):
    prog = write(tmp_path, "p.geo", SCENES["triangle_two_sixty"].replace("Length(AB,30)\n", ""))
    sol, rep = tmp_path / "s.json", tmp_path / "r.json"
    assert main(["solve", prog, "-o", str(sol), *FAST]) == 0
    assert main(["eval", prog, str(sol), "-o", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["lci"] is None and report["adi"] is not None and report["n_line"] == 0


def test_eval_recomputes_from_assignment(tmp_path):
    text = SCENES["perpendicular_foot"]
    prog = write(tmp_path, "p.geo", text)
    sol, rep = tmp_path / "s.json", tmp_path / "r.json"
    assert main(["solve", prog, "-o", str(sol), *FAST]) == 0
    assert main(["eval", prog, str(sol), "-o", str(rep), "--alpha", "0.5"]) == 0
    doc, report = json.loads(sol.read_text()), json.loads(rep.read_text())
    scene = compile_program(parse(text))
    coords = {k: tuple(v) for k, v in doc["coordinates"].items()}
    scores, _ = evaluate(scene, coords, doc["degenerate"])
    expected = build_report(scores, 0.5).to_dict()
    assert report["lci"] == pytest.approx(expected["lci"], abs=1e-9)
    assert report["adi"] == pytest.approx(expected["adi"], abs=1e-9)


def test_eval_mismatched_solution(tmp_path):
    a = write(tmp_path, "a.geo", SCENES["triangle_two_sixty"])
    b = write(tmp_path, "b.geo", "shapes:\nPolygon(ABC)\n")
    sol = tmp_path / "s.json"
    assert main(["solve", b, "-o", str(sol)]) == 0
    assert main(["eval", a, str(sol)]) == 4


def test_run_program(tmp_path):
    prog = write(tmp_path, "p.geo", SCENES["square_with_diagonals"])
    out = tmp_path / "out"
    assert main(["run", prog, "--out", str(out), *FAST]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert [s["stage"] for s in manifest["stages"]] == ["compile", "solve", "eval", "render"]
    assert manifest["exit_status"] == 0
    for name in ("solution.json", "trace.csv", "report.json", "diagram.svg"):
        assert (out / name).exists()


def test_run_records_failure(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nTriangle(ABC)\n")
    out = tmp_path / "out"
    assert main(["run", prog, "--out", str(out)]) == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["exit_status"] == 4 and "error" in manifest


def test_run_natural_with_endpoint(tmp_path, monkeypatch):
    text = write(tmp_path, "q.txt", "A square ABCD.")
    out = tmp_path / "out"
    with FakeEndpoint(["I think:", VALID_REPLY]) as ep:
        monkeypatch.setenv("GEOLINGUA_BASE_URL", ep.url)
        monkeypatch.setenv("GEOLINGUA_API_KEY", "k")
        assert main(["run", text, "--out", str(out), *FAST]) == 0
    assert len(ep.requests) == 2
    assert ep.requests[0]["path"] == "/v1/chat/completions" and ep.requests[0]["auth"] == "Bearer k"
    assert ep.requests[0]["body"] == ep.requests[1]["body"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert [s["stage"] for s in manifest["stages"]] == ["formalize", "compile", "solve", "eval", "render"]
    audit = json.loads((out / "audit.json").read_text())
    assert [a["ok"] for a in audit["attempts"]] == [False, True]
    assert (out / "program.json").exists()


def test_formalize_exhausted(tmp_path, monkeypatch):
    text = write(tmp_path, "q.txt", "A square ABCD.")
    audit = tmp_path / "audit.json"
    with FakeEndpoint(["x", "y", "z"]) as ep:
        monkeypatch.setenv("GEOLINGUA_API_KEY", "k")
        assert main(["formalize", text, "--base-url", ep.url, "--audit", str(audit)]) == 2
    assert len(json.loads(audit.read_text())["attempts"]) == 3


def test_formalize_writes_program(tmp_path, monkeypatch):
    text = write(tmp_path, "q.txt", "A square ABCD.")
    out = tmp_path / "p.json"
    with FakeEndpoint([VALID_REPLY]) as ep:
        monkeypatch.setenv("GEOLINGUA_API_KEY", "k")
        assert main(["formalize", text, "--base-url", ep.url, "-o", str(out)]) == 0
    assert json.loads(out.read_text())["shapes"] == ["Square(ABCD)"]


def test_formalize_missing_credential(tmp_path):
    text = write(tmp_path, "q.txt", "A square ABCD.")
    assert main(["formalize", text]) == 3


def test_formalize_unreachable(tmp_path, monkeypatch):
    text = write(tmp_path, "q.txt", "A square ABCD.")
    monkeypatch.setenv("GEOLINGUA_API_KEY", "k")
    assert main(["formalize", text, "--base-url", "http://127.0.0.1:9/v1", "--timeout", "2"]) == 3


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["solve", "x.geo", "--alpha", "abc"])
    assert info.value.code == 64


def test_invalid_config_value(tmp_path):
    prog = write(tmp_path, "p.geo", "shapes:\nPolygon(ABC)\n")
    assert main(["solve", prog, "--alpha", "-1"]) == 64


def test_config_precedence(tmp_path):
    cfg = write(tmp_path, "c.json", json.dumps({"alpha": 0.2, "inner": 7, "outer": 9, "seed": 3}))
    args = build_parser().parse_args(["solve", "x.geo", "--config", cfg, "--outer", "11"])
    config, overrides = resolve_config(args, env={"GEOLINGUA_INNER": "8"})
    assert (config.alpha, config.inner_iterations, config.outer_iterations, config.seed) == (0.2, 8, 11, 3)
    assert config.restarts == 3
    assert overrides == {"alpha": 0.2, "inner": 8, "outer": 11, "seed": 3}
