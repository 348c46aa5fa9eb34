import json

import pytest

from lipext.cli import main


@pytest.fixture
def path4(tmp_path):
    p = tmp_path / "p4.json"
    assert main(["gen", "path", "--m", "4", "-o", str(p)]) == 0
    return p


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_validate_ok(path4, capsys):
    assert main(["validate", str(path4)]) == 0
    assert _json_out(capsys) == {"valid": True, "size": 5}


def test_validate_rejects(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"metric": {"dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]}}))
    assert main(["validate", str(p)]) == 1
    assert _json_out(capsys)["violations"] == ["TriangleViolation(0, 2, 1, slack=1)"]


def test_extend_mcshane(path4, tmp_path, capsys):
    m = tmp_path / "map.json"
    m.write_text(json.dumps({"domain": [0, 4], "values": [[0], [4]], "target": {"kind": "real_line"}}))
    assert main(["extend", str(path4), str(m)]) == 0
    out = _json_out(capsys)
    assert out["constant"] == 1 and out["oracle"] == "mcshane"
    assert out["map"]["values"] == [[0.0], [1.0], [2.0], [3.0], [4.0]]


def test_glue_subcommand(path4, tmp_path, capsys):
    m = tmp_path / "map.json"
    m.write_text(json.dumps({"domain": [0, 4], "values": [[0], [1]],
                             "target": {"kind": "finite", "metric": {"dist": [[0, 1], [1, 0]]}}}))
    assert main(["glue", str(path4), str(m), "--xs", "2", "--oracle", "brute"]) == 0
    out = _json_out(capsys)
    assert out["certified"] and out["achieved"] <= out["certified_bound"]


# e_2 = 4 and e^2 = 3 on the 5-point path, from the reference enumeration in oracles.py
@pytest.mark.parametrize("q,key,expected", [("e_n", "value", 4), ("e_up_n", "value", 2), ("claim1", "slack", 3)])
def test_modulus_subcommand(path4, capsys, q, key, expected):
    assert main(["modulus", str(path4), "--quantity", q, "--n", "2" if q != "e_up_n" else "1",
                 "--target", "two-point"]) == 0
    assert _json_out(capsys)[key] == expected


def test_modulus_csv(path4, capsys):
    assert main(["modulus", str(path4), "--quantity", "e", "--subset", "0", "4", "--out", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("instance_id,quantity,exact")
    assert lines[1].endswith(",4.0")


def test_run_and_plot(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"id": "paths", "generator": {"kind": "path", "m": [2, 3]},
                                "quantity": "claim1_scan", "targets": ["two-point"], "n": [1]}))
    out = tmp_path / "out"
    assert main(["run", str(spec), "--out-dir", str(out), "--out", "csv"]) == 0
    assert main(["plot", str(out / "results.csv"), "--out-dir", str(tmp_path / "plots")]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rows"] == 2 and summary["ok"]


def test_bad_input_exit_code(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{}")
    assert main(["modulus", str(p)]) == 2
