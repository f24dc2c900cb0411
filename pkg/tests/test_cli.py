import json
import xml.etree.ElementTree as ET

import pytest

from kmheron.cli import main
from kmheron.errors import InfeasibleError, SceneParseError
from kmheron.reporting import parse_distance_matrix
from kmheron.scenes import BUNDLED, bundled_text, load_scene, parse_scene, render_scene

SVG = "{http://www.w3.org/2000/svg}"


def write_scene(tmp_path, doc, name="scene.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


TOY_DOC = {
    "dim": 2,
    "feasible": [{"type": "ball", "center": [0, 0], "radius": 1}],
    "targets": [{"type": "ball", "center": [5, 0], "radius": 1}],
    "initial": [[0, 1], [5, -1]],
}


# -- scene files ----------------------------------------------------------------

@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_round_trip(name):
    scene = load_scene(name)
    again = parse_scene(render_scene(scene), name=name)
    assert again == scene
    assert render_scene(again) == bundled_text(name)


def test_parse_error_reports_line():
    with pytest.raises(SceneParseError) as info:
        parse_scene('{\n  "dim": 2,\n  "feasible": [\n}')
    assert info.value.line == 4


def test_unknown_shape_names_field():
    doc = dict(TOY_DOC, targets=[{"type": "ellipse", "center": [5, 0]}])
    with pytest.raises(SceneParseError) as info:
        parse_scene(json.dumps(doc))
    assert info.value.field == "targets[0].type"
    assert "ellipse" in str(info.value)


def test_missing_field_and_wrong_dimension():
    with pytest.raises(SceneParseError, match="radius"):
        parse_scene(json.dumps(dict(TOY_DOC, feasible=[{"type": "ball", "center": [0, 0]}])))
    with pytest.raises(SceneParseError) as info:
        parse_scene(json.dumps(dict(TOY_DOC, feasible=[{"type": "ball", "center": [0, 0, 0], "radius": 1}])))
    assert info.value.field == "feasible[0]"


def test_infeasible_initial_names_the_set():
    doc = dict(TOY_DOC, initial=[[0, 1], [8, 0]])
    with pytest.raises(InfeasibleError) as info:
        parse_scene(json.dumps(doc))
    assert (info.value.kind, info.value.index) == ("target", 1)


def test_default_initial_points_are_feasible():
    doc = {k: v for k, v in TOY_DOC.items() if k != "initial"}
    scene = parse_scene(json.dumps(doc))
    Z = scene.initial_configuration()
    assert scene.instance().feasible[0].contains(Z.xs[0])
    assert scene.instance().targets[0].contains(Z.ys[0])


# -- solve ----------------------------------------------------------------------

def test_solve_example_5_1_writes_artifacts(tmp_path, capsys):
    assert main(["solve", "example_5_1", "--out", str(tmp_path), "--svg"]) == 0
    out = capsys.readouterr().out
    assert "best objective: 79.1136" in out
    assert "certificate at tol 0.001: PASSED" in out
    d = parse_distance_matrix((tmp_path / "distances.csv").read_text())
    assert d.shape == (4, 3)
    assert d[0, 0] == pytest.approx(4.6386, abs=1e-3)
    history = (tmp_path / "history.csv").read_text().splitlines()
    assert history[0] == "iteration,objective,delta"
    assert any(line.startswith("1000,79.113630,") for line in history)

    root = ET.parse(tmp_path / "figure.svg").getroot()
    sets = [e for e in root.iter() if e.get("class", "").startswith("set ")]
    points = [e for e in root.iter() if e.get("class", "").startswith("point ")]
    assert len(sets) == 7 and len(points) == 7
    assert sum(1 for e in root.iter(f"{SVG}circle") if "set" in e.get("class", "")) == 4
    assert sum(1 for e in root.iter(f"{SVG}rect") if "set" in e.get("class", "")) == 3


def test_solve_example_5_2_distance(tmp_path):
    assert main(["solve", "example_5_2", "--out", str(tmp_path), "--svg"]) == 0
    d = parse_distance_matrix((tmp_path / "distances.csv").read_text())
    assert d[2, 1] == pytest.approx(3.7642, abs=1e-3)
    assert not (tmp_path / "figure.svg").exists()


def test_solve_one_iteration(tmp_path, capsys):
    assert main(["solve", "two_ball_toy", "--max-iters", "1", "--out", str(tmp_path)]) == 0
    assert "stop: MaxIters after 1 iterations" in capsys.readouterr().out
    rows = (tmp_path / "history.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("1,")
    assert json.loads((tmp_path / "solution.json").read_text())["stop_reason"] == "MaxIters"


def test_reports_are_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert main(["solve", "example_5_2", "--out", str(tmp_path / sub)]) == 0
    for f in ("history.csv", "distances.csv", "solution.json", "report.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_precision_flag(capsys):
    main(["solve", "two_ball_toy", "--precision", "10"])
    assert "best objective: 3.0000000000" in capsys.readouterr().out


def test_solve_several_scenes_in_parallel(tmp_path):
    code = main(["solve", "two_ball_toy", "classical_heron", "--jobs", "2", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "two_ball_toy" / "report.txt").exists()
    assert (tmp_path / "classical_heron" / "report.txt").exists()


def test_schedule_override(capsys):
    assert main(["solve", "two_ball_toy", "--schedule", "const:0.01", "--max-iters", "50"]) == 0
    assert "schedule const:0.01" in capsys.readouterr().out


# -- oracle, certify, scenes --------------------------------------------------

def test_oracle_toy(capsys):
    assert main(["oracle", "two_ball_toy", "--density", "512", "--refine", "3"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("oracle value: ")[1].split()[0])
    assert value == pytest.approx(3.0, abs=1e-3)
    assert "near-optimal configurations (tol 1e-06): 1" in out


def test_oracle_example_3_1_count(capsys):
    assert main(["oracle", "example_3_1", "--density", "32", "--interior"]) == 0
    out = capsys.readouterr().out
    assert int(out.split("near-optimal configurations (tol 1e-06): ")[1].split()[0]) >= 10


def test_oracle_example_5_2_coarse(capsys):
    assert main(["oracle", "example_5_2", "--density", "24", "--budget", "5e7", "--compare"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("oracle value: ")[1].split()[0])
    assert abs(value - 30.691348) <= 0.2
    assert "oracle - solver gap" in out


def test_certify(tmp_path, capsys):
    good = write_scene(tmp_path, {"xs": [[1, 0]], "ys": [[4, 0]]}, "good.json")
    bad = write_scene(tmp_path, {"xs": [[0, 1]], "ys": [[4, 0]]}, "bad.json")
    assert main(["certify", "two_ball_toy", "--points", good]) == 0
    assert "PASSED" in capsys.readouterr().out
    assert main(["certify", "two_ball_toy", "--points", bad]) == 1


def test_certify_reads_solution_file(tmp_path):
    main(["solve", "two_ball_toy", "--out", str(tmp_path)])
    assert main(["certify", "two_ball_toy", "--points", str(tmp_path / "solution.json")]) == 0


def test_scenes_list_and_show(capsys):
    assert main(["scenes", "list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in BUNDLED)
    assert main(["scenes", "show", "two_ball_toy"]) == 0
    assert json.loads(capsys.readouterr().out)["dim"] == 2


# -- exit codes -----------------------------------------------------------------

def test_exit_codes(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    assert main(["solve", write_scene(tmp_path, "{ not json", "broken.json")]) == 2
    assert main(["scenes", "show", "nope"]) == 2
    infeasible = write_scene(tmp_path, dict(TOY_DOC, initial=[[3, 0], [5, 0]]), "inf.json")
    assert main(["solve", infeasible]) == 3
    assert main(["oracle", "example_5_1", "--density", "64"]) == 5
    unbounded = {
        "dim": 2,
        "feasible": [{"type": "halfspace", "normal": [0, 1], "offset": 0}],
        "targets": [{"type": "singleton", "point": [0, 3]}],
    }
    assert main(["oracle", write_scene(tmp_path, unbounded, "unb.json")]) == 5
    err = capsys.readouterr().err
    assert "outside" in err and "hint:" in err
