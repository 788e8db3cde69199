import json
import os
from fractions import Fraction

import pytest

from toruslab.src.routing import run
from toruslab.src.args import DEFAULTS, expand_aliases
from toruslab.src.formats import curve_to_json, marking_to_json
from toruslab.src.graphs import make_marking
from toruslab.src.families import ALPHA, BETA, staircase_curve


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


@pytest.fixture
def curves(tmp_path):
    paths = {}
    for name, obj in {
        "alpha": curve_to_json(ALPHA),
        "beta": curve_to_json(BETA),
        "stair": curve_to_json(staircase_curve(2)),
        "double": {"vertices": [["0", "0"], ["1/2", "1/3"]], "closure": [2, 0]},
        "marking": marking_to_json(make_marking(ALPHA, BETA)),
        "identity": {"kind": "compose", "words": []},
    }.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(obj))
        paths[name] = str(path)
    return paths


class TestExitCodes:

    def test_intersect(self, capsys, curves):
        code, out = invoke(capsys, "intersect", curves["alpha"], curves["beta"])
        assert code == 0
        assert out["count"] == 1
        assert out["transverse"] is True
        assert out["touch_points"] == []

    def test_domain_error(self, capsys, curves):
        code, out = invoke(capsys, "intersect", curves["alpha"], curves["alpha"])
        assert code == 2
        assert out["error"] == "OverlappingSegments"

    def test_invalid_curve(self, capsys, curves):
        code, out = invoke(capsys, "curve-validate", curves["double"])
        assert code == 2
        assert out["error"] == "Inessential"

    def test_usage_errors(self, capsys, curves):
        assert invoke(capsys, "intersect", curves["alpha"]) == (1, None)
        assert invoke(capsys, "fly", curves["alpha"]) == (1, None)
        assert invoke(capsys, "intersect", curves["alpha"], "missing.curve") == (1, None)
        assert invoke(capsys, "rotset", "example:h", "--grid", "many") == (1, None)
        assert invoke(capsys, "project", curves["beta"]) == (1, None)
        assert invoke(capsys, "farey", "1/2", "x") == (1, None)

    def test_no_command(self, capsys):
        assert run([]) == 1
        assert run(["--help"]) == 0

    def test_explain_defaults(self, capsys):
        code, out = invoke(capsys, "farey", "--explain_defaults")
        assert code == 0
        assert out == json.loads(json.dumps(DEFAULTS))

    def test_condition_failed(self, capsys, curves):
        code, out = invoke(capsys, "triangle-check", curves["identity"], "--n", "2", "--grid", "4")
        assert code == 2
        assert out["error"] == "ConditionFailed"
        assert "repeller" in out["failed"]
        assert out["report"]["conditions"]["repeller"] is False


class TestCommands:

    def test_curve_validate(self, capsys, curves):
        code, out = invoke(capsys, "curve-validate", curves["stair"])
        assert code == 0
        assert out["valid"] is True
        assert out["closure"] == [1, 0]

    def test_project(self, capsys, curves):
        code, out = invoke(capsys, "project", "--annulus", curves["alpha"], curves["beta"])
        assert code == 0
        assert out["empty"] is False
        assert out["arcs"] == [{"vertices": [["0", "0"], ["0", "1"]], "essential": True}]

    def test_width(self, capsys, curves):
        code, out = invoke(capsys, "width", curves["alpha"], curves["stair"], "--relative")
        assert (code, out["value"]) == (0, 2)
        code, out = invoke(capsys, "width", "--annulus", curves["alpha"], curves["beta"], curves["beta"])
        assert (code, out["value"]) == (0, 1)

    def test_d0(self, capsys, curves):
        code, out = invoke(capsys, "d0", curves["alpha"], curves["stair"])
        assert code == 0
        assert out["value"] == 3
        assert out["certificates"]["cover_degree"] == 2

    def test_twist_markings(self, capsys, curves):
        code, out = invoke(capsys, "twist", "--annulus", curves["beta"],
                           curves["marking"], curves["marking"], "--markings")
        assert (code, out["value"]) == (0, 0)

    def test_farey(self, capsys):
        code, out = invoke(capsys, "farey", "0/1", "2/5", "--bfs_check")
        assert code == 0
        assert out["value"] == 2
        assert out["certificates"] == {"adjacent": False, "bfs": 2}

    def test_eval(self, capsys):
        code, out = invoke(capsys, "eval", "example:f", "--point", "0,1/2", "--iterations", "3")
        assert code == 0
        assert out["exact"] is True
        assert out["point"] == ["3", "1/2"]
        assert out["displacement"] == ["3", "0"]

    def test_rotset(self, capsys):
        code, out = invoke(capsys, "rotset", "example:h", "--n_schedule", "2", "4", "--grid", "8",
                           "--reference", "0,0;1,0;1,1;0,1")
        assert code == 0
        assert out["hull"] == [[0, 0], [1, 0], [1, 1], [0, 1]]
        assert out["hausdorff"] == 0
        assert out["n"] == 4

    def test_rotset_svg(self, capsys, tmp_path):
        target = tmp_path / "rotset.svg"
        code, _ = invoke(capsys, "rotset", "example:f", "--n_schedule", "2", "--grid", "8",
                         "--format", "svg", "--out", target)
        assert code == 0
        assert "<svg" in target.read_text()
        assert invoke(capsys, "rotset", "example:f", "--n_schedule", "2", "--grid", "8",
                      "--format", "svg") == (1, None)

    def test_rotset_short_flags(self, capsys, tmp_path):
        target = tmp_path / "short.svg"
        code, out = invoke(capsys, "rotset", "example:f", "--n", "2", "--grid", "8", "--svg", target)
        assert code == 0
        assert out["n"] == 2
        assert "<svg" in target.read_text()
        assert expand_aliases("rotset", ["--n=4", "--svg=a.svg"]) == [
            "--n_schedule", "4", "--format", "svg", "--out", "a.svg"
        ]
        assert expand_aliases("axis-cert", ["--n", "2"]) == ["--n", "2"]

    def test_quasipath_files(self, capsys, curves, tmp_path):
        target = tmp_path / "path"
        code, out = invoke(capsys, "quasipath", curves["alpha"], curves["stair"], "--out", target)
        assert code == 0
        assert out["length"] == 3
        names = sorted(os.listdir(target))
        assert names == ["certificate.json"] + [f"sigma_{i}.curve" for i in range(4)]

    def test_perturb(self, capsys, curves, tmp_path):
        touching = tmp_path / "touching.json"
        touching.write_text(json.dumps({"vertices": [["0", "0"], ["1/2", "1/2"]], "closure": [1, 0]}))
        code, out = invoke(capsys, "perturb", curves["alpha"], touching, "--budget", str(Fraction(1, 4)))
        assert code == 0
        assert out["transverse"] is True
        assert out["count"] == 0

    def test_verify_suite(self, capsys):
        code, out = invoke(capsys, "verify-suite", "--filter", "^farey_bfs$", "--fast")
        assert code == 0
        assert out["passed"] is True
        assert [c["name"] for c in out["checks"]] == ["farey_bfs"]
