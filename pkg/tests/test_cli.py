import json
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

from geowl.cli import main
from geowl.cloudfile import cloud_to_json, load_cloud, parse_cloud_text, save_cloud
from geowl.geometry import PointCloud

SQUARE_DOC = {"dim": 2, "points": [[[0, 1], [0, 1]], [[1, 1], [0, 1]],
                                   [[1, 1], [1, 1]], [[0, 1], [1, 1]]],
              "label": "square"}


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def test_cloud_file_round_trip(tmp_path):
    cloud = PointCloud(2, ((F(1, 3), F(-2, 7)), (F(0), F(4))), label="x")
    path = tmp_path / "c.json"
    save_cloud(cloud, path)
    back = load_cloud(path)
    assert back.points == cloud.points and back.exact


def test_cloud_file_coordinate_forms():
    doc = {"dim": 2, "points": [["0.5", [1, 3]], [2, "3/4"]]}
    cloud = parse_cloud_text(json.dumps(doc))
    assert cloud.points == ((F(1, 2), F(1, 3)), (F(2), F(3, 4)))
    assert cloud.exact
    floaty = parse_cloud_text(json.dumps({"dim": 1, "points": [[0.25], [1]]}))
    assert not floaty.exact  # plain floats force float mode


def test_cloud_file_xyz_form():
    cloud = parse_cloud_text("0 0 1\n1 0.5 2\n")
    assert cloud.dim == 3 and cloud.n == 2 and cloud.exact


def test_cmd_color_and_exit_codes(tmp_path, capsys):
    path = _write(tmp_path, "sq.json", SQUARE_DOC)
    out = tmp_path / "fp.json"
    assert main(["color", path, "--ell", "1", "--iters", "3",
                 "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "iteration 0: 1 color classes" in text
    doc = json.loads(out.read_text())
    assert doc["ell"] == 1 and doc["iters"] == 3 and doc["total"] == 4

    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["color", str(bad)]) == 2

    missing = str(tmp_path / "nope.json")
    assert main(["color", missing]) == 2


def test_cmd_color_cap_exceeded(tmp_path, capsys):
    big = {"dim": 3, "points": [[[i, 1], [j, 1], [k, 1]]
                                for i in range(4) for j in range(4)
                                for k in range(4)][:50]}
    path = _write(tmp_path, "big.json", big)
    assert main(["color", path, "--ell", "3", "--iters", "1"]) == 3


def test_cmd_compare(tmp_path, capsys):
    a = _write(tmp_path, "a.json", {"dim": 1, "points": [[0], [1], [2]]})
    b = _write(tmp_path, "b.json", {"dim": 1, "points": [[0], [1], [3]]})
    assert main(["compare", a, a, "--ell", "1", "--iters", "3"]) == 0
    assert "equal-fingerprints" in capsys.readouterr().out
    assert main(["compare", a, b, "--ell", "1", "--iters", "3"]) == 0
    assert "first distinguishing iteration: 1" in capsys.readouterr().out
    c = _write(tmp_path, "c.json", {"dim": 2, "points": [[0, 0], [1, 1]]})
    assert main(["compare", a, c]) == 2


def test_cmd_roundtrip_all_algorithms(tmp_path, capsys):
    sq = _write(tmp_path, "sq.json", SQUARE_DOC)
    assert main(["roundtrip", sq, "--algorithm", "wl2d"]) == 0
    assert "verified: yes" in capsys.readouterr().out
    assert main(["roundtrip", sq, "--algorithm", "oneshot"]) == 0
    tet = _write(tmp_path, "tet.json",
                 {"dim": 3, "points": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]})
    assert main(["roundtrip", tet, "--algorithm", "wlnd",
                 "-o", str(tmp_path / "rep.json")]) == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["verified"] and rep["residual"] < 1e-6
    # dimension mismatch is a usage error
    assert main(["roundtrip", tet, "--algorithm", "wl2d"]) == 2


def test_cmd_gen_deterministic(tmp_path, capsys):
    out1 = tmp_path / "g1.json"
    out2 = tmp_path / "g2.json"
    assert main(["gen", "--n", "5", "--d", "2", "--seed", "11", "-o", str(out1)]) == 0
    assert main(["gen", "--n", "5", "--d", "2", "--seed", "11", "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    cloud = load_cloud(out1)
    assert cloud.n == 5 and cloud.exact


def test_cli_outputs_byte_identical(tmp_path, capsys):
    sq = _write(tmp_path, "sq.json", SQUARE_DOC)
    outputs = []
    for out in ("r1.json", "r2.json"):
        main(["roundtrip", sq, "--algorithm", "wl2d", "--seed", "7",
              "-o", str(tmp_path / out)])
        outputs.append((tmp_path / out).read_bytes())
        capsys.readouterr()
    assert outputs[0] == outputs[1]


def test_cmd_search_deterministic(tmp_path, capsys):
    outs = []
    for name in ("s1.json", "s2.json"):
        assert main(["search", "--d", "1", "--n", "3", "--ell", "1",
                     "--iters", "1", "--budget", "10", "--seed", "3",
                     "-o", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
        capsys.readouterr()
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["params"]["budget"] == 10
    assert isinstance(doc["findings"], list)


def test_seed_env_var_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GEOWL_SEED", "99")
    out1 = tmp_path / "e1.json"
    assert main(["gen", "--n", "4", "--d", "2", "-o", str(out1)]) == 0
    monkeypatch.delenv("GEOWL_SEED")
    out2 = tmp_path / "e2.json"
    assert main(["gen", "--n", "4", "--d", "2", "--seed", "99", "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_console_entry_point(tmp_path):
    # one subprocess sanity check of the installed script path
    proc = subprocess.run([sys.executable, "-m", "geowl.cli", "gen", "--n", "3",
                           "--d", "2", "--seed", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["dim"] == 2
