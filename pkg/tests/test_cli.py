import json

import numpy as np
import pytest

from coble import __version__
from coble.cli import main
from coble.exterior import Trivector
from coble.orbits8 import normal_form, transport


def read(path):
    return json.loads(path.read_text())


def test_gen_is_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen", "--prime", "7", "--seed", "3", "--out", str(a)]) == 0
    assert main(["gen", "--prime", "7", "--seed", "3", "--out", str(b)]) == 0
    assert (a / "trivector.json").read_bytes() == (b / "trivector.json").read_bytes()
    doc = read(a / "trivector.json")
    assert doc["prime"] == 7 and doc["dim"] == 9 and doc["seed"] == 3 and doc["version"] == __version__
    assert doc["gate"]["diagnostic"] == "ok"
    Trivector.from_json(doc)


def test_cubic_scan_group_report(tmp_path):
    main(["gen", "--prime", "7", "--seed", "1", "--out", str(tmp_path)])
    tv = str(tmp_path / "trivector.json")
    assert main(["cubic", "--input", tv, "--out", str(tmp_path)]) == 0
    cub = read(tmp_path / "cubic.json")
    assert cub["identity"] and cub["interpolation_matches"] and cub["q"] == 7
    assert main(["scan", "--input", tv, "--out", str(tmp_path)]) == 0
    scan = read(tmp_path / "scan.json")
    assert scan["count"] == len(scan["points"]) and scan["predicate"] == "rank<=4"
    assert main(["group", "--input", tv, "--out", str(tmp_path), "--trials", "5"]) == 0
    grp = read(tmp_path / "group.json")
    assert grp["law_failures"] == 0 and grp["lagrange"] and grp["order"] == scan["count"]
    assert main(["report", "--input", str(tmp_path / "scan.json"), "--input", str(tmp_path / "group.json"), "--out", str(tmp_path)]) == 0
    merged = read(tmp_path / "merged.json")
    assert set(merged["artifacts"]) == {"scan", "group"}


def test_classify(tmp_path):
    path = tmp_path / "y.json"
    path.write_text(json.dumps(transport(normal_form("Y6"), 4).to_json()))
    assert main(["classify", "--input", str(path), "--out", str(tmp_path)]) == 0
    assert read(tmp_path / "classify.json")["label"] == "Y6"


def test_classify_rejects_nine_variables(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps(Trivector.random(9, 5, np.random.default_rng(0)).to_json()))
    assert main(["classify", "--input", str(path), "--out", str(tmp_path)]) == 2


def test_verify_unsuitable_input(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(Trivector.from_terms(9, 7, {(0, 1, 2): 1}).to_json()))
    assert main(["verify", "--input", str(path), "--checks", "1", "2", "--out", str(tmp_path)]) == 1
    rep = read(tmp_path / "report.json")
    assert not rep["all_hard_passed"]
    assert all("gate" in c["evidence"] for c in rep["checks"])
    assert "generic_rank" in capsys.readouterr().out


def _strip_timing(report):
    return [{k: v for k, v in c.items() if k != "millis"} for c in report["checks"]]


def test_verify_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--checks", "1", "2", "3", "5", "9", "10", "--out", str(a)]) == 0
    assert main(["verify", "--checks", "1", "2", "3", "5", "9", "10", "--out", str(b)]) == 0
    assert _strip_timing(read(a / "report.json")) == _strip_timing(read(b / "report.json"))


@pytest.mark.slow
def test_sextic_round_trip(tmp_path):
    assert main(["sextic", "--out", str(tmp_path)]) == 0
    sx = read(tmp_path / "sextic.json")
    assert sx["q"] == 23 and sx["kernel_dim"] == 1 and sx["ladder"] == []
    assert main(["verify", "--input", str(tmp_path / "sextic.json"), "--checks", "8", "--out", str(tmp_path)]) == 0
    rep = read(tmp_path / "report.json")
    assert rep["sextic_from_file"] and rep["checks"][0]["passed"]
