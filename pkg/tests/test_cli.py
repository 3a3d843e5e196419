import csv
import io
import json

import pytest

from fockband.cli import dumps, run


def _out(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


def test_bands_remark(capsys):
    code, cap = _out(capsys, ["bands", "--preset", "remark", "--n", "8"])
    assert code == 0
    doc = json.loads(cap.out)
    assert {"four", "three", "two1", "two2", "essential", "hwz_min"} <= set(doc)
    pts = [(d["p"][0], d["q"][0], d["value"]) for d in doc["degenerate_fibers"]]
    assert any(abs(p - 3.14159265358979) < 1e-12 and abs(q - p) < 1e-12 and abs(v - 4) < 1e-12 for p, q, v in pts)


def test_hwz_decoupled(capsys):
    code, cap = _out(capsys, ["hwz", "--preset", "decoupled", "--n", "6"])
    assert code == 0
    assert json.loads(cap.out)["hwz_min"] == 0


def test_eigs_methods_agree(capsys):
    rows = {}
    for method in ("fy", "oracle"):
        code, cap = _out(capsys, ["eigs", "--preset", "symmetric", "--n", "8", "--method", method, "--format", "csv"])
        assert code == 0
        rows[method] = [float(r["z"]) for r in csv.DictReader(io.StringIO(cap.out))]
    assert len(rows["fy"]) == len(rows["oracle"]) >= 1
    assert all(abs(a - b) <= 1e-8 for a, b in zip(rows["fy"], rows["oracle"]))


def test_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["essential", "--preset", "symmetric", "--n", "6", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_problem_file(tmp_path, capsys):
    from fockband import preset

    path = tmp_path / "p.json"
    path.write_text(json.dumps(preset("symmetric", n=6).to_json()))
    code, cap = _out(capsys, ["hwz", "--problem", str(path)])
    assert code == 0 and "hwz_min" in cap.out


def test_usage_errors(tmp_path, capsys):
    assert run(["eigs"]) == 2
    assert run(["eigs", "--preset", "symmetric", "--problem", "x.json"]) == 2
    assert run(["bands", "--preset", "symmetric", "--bogus"]) == 2
    assert run(["hwz", "--problem", str(tmp_path / "missing.json")]) == 2
    assert run(["scan", "--preset", "symmetric", "--n", "6"]) == 2
    capsys.readouterr()


def test_domain_error_exit(capsys):
    assert run(["pencil", "--preset", "symmetric", "--n", "6"]) == 1
    assert "not below" in capsys.readouterr().err


def test_scan_csv(capsys):
    code, cap = _out(capsys, ["scan", "--preset", "symmetric", "--n", "6", "--z-min", "-12", "--z-max", "-11", "--points", "5", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert len(rows) == 5 and all(r["admissible"] == "1" for r in rows)


def test_verify_subset(capsys):
    assert run(["verify", "--check", "1", "--check", "2"]) == 0
    assert "2/2 checks passed" in capsys.readouterr().out


def test_dumps_format():
    assert dumps({"a": [1.0, 2], "b": 0.1 + 0.2, "c": float("inf")}) == (
        '{\n  "a": [1, 2],\n  "b": 0.3,\n  "c": "inf"\n}'
    )


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("FOCKBAND_THREADS", "1")
    assert run(["hwz", "--preset", "decoupled", "--n", "6"]) == 0
    capsys.readouterr()


def test_scan_determinants(capsys):
    code, cap = _out(capsys, ["scan", "--preset", "symmetric", "--n", "6", "--target", "delta3", "--p", "1", "--q", "2",
                               "--z-min", "-8", "--z-max", "8", "--points", "9", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(cap.out)))
    assert rows[0]["delta3"] != "nan" and rows[5]["delta3"] == "nan"
    code, cap = _out(capsys, ["scan", "--preset", "symmetric", "--n", "6", "--target", "delta12",
                               "--z-min", "-12", "--z-max", "-10", "--points", "3"])
    assert code == 0 and len(json.loads(cap.out)["delta2"]) == 3
