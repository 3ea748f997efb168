import csv
import json

import pytest

from ogk import cli
from ogk import formats
from ogk import groupoid as gm


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zoo_lists_everything(capsys):
    code, out, _ = run(["zoo", "--list"], capsys)
    assert code == 0
    for ident in ("power:2", "xlogx", "pair:3", "bundle:S3", "z2-linear"):
        assert ident in out


def test_validate_zoo_and_file(tmp_path, capsys):
    code, out, _ = run(["validate", "pair:3"], capsys)
    assert code == 0 and json.loads(out)["groupoid"]["valid"]
    bad = gm.corrupt_product(gm.from_id("bundle:Z3"), (1, 1), (1, 2))
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(formats.groupoid_to_dict(bad)))
    code, out, _ = run(["validate", str(p)], capsys)
    assert code == 1
    assert "associativity" in json.loads(out)["groupoid"]["violation_counts"]


def test_norm_and_convolve(tmp_path, capsys):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"0": [1, 2], "3": [3, 4]}))
    k = tmp_path / "k.json"
    k.write_text(json.dumps({"0": [0, 1], "3": [1, 0]}))
    code, out, _ = run(["norm", str(f), "--groupoid", "pair:2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["fibers"]["3"] == pytest.approx(5.0)
    code, out, _ = run(["norm", str(f), "--groupoid", "pair:2", "--which", "orlicz"], capsys)
    assert json.loads(out)["sup"] == pytest.approx(10.0)
    code, out, _ = run(["convolve", str(f), str(k), "--groupoid", "pair:2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [v[0] for v in doc["0"] + doc["3"]] == [2.0, 1.0, 4.0, 3.0]


def test_check_writes_json_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    code, text, _ = run(["check", "norms", "--seed", "3", "--trials", "20", "--out", str(out), "--csv", str(table)],
                        capsys)
    assert code == 0 and "PASS" in text
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1 and doc["passed"] and "wall_time_s" in doc
    rows = list(csv.DictReader(table.open()))
    assert rows and set(rows[0]) == {"suite", "check", "slack", "tolerance", "verdict", "cases"}


def test_check_is_deterministic_without_timing(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(["check", "orlicz", "--seed", "5", "--trials", "20", "--omit-timing", "--out", str(p)], capsys)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert "wall_time_s" not in paths[0].read_text()


def test_check_restricted_to_groupoids_and_phis(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["check", "sandwich", "--trials", "10", "--groupoid", "pair:2", "--phi", "power:3",
                      "--out", str(out)], capsys)
    assert code == 0
    names = [c["name"] for c in json.loads(out.read_text())["suites"][0]["checks"]]
    assert names and all("pair:2" in n and "power:3" in n for n in names)


def test_injected_fault_exits_one_with_witness(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, text, _ = run(["check", "groupoid", "--trials", "10", "--inject-fault", "assoc", "--out", str(out)], capsys)
    assert code == 1
    failed = [c for s in json.loads(out.read_text())["suites"] for c in s["checks"] if c["verdict"] == "fail"]
    assert [c["name"] for c in failed] == ["injected-fault:assoc"]
    assert "associativity" in failed[0]["witness"]


@pytest.mark.parametrize("argv", [
    ["check", "all", "--groupoid", "pair:x"],
    ["check", "nonsense"],
    ["check", "norms", "--trials", "0"],
    ["check", "norms", "--phi", "power:0.5"],
    ["check", "norms", "--inject-fault", "other"],
    ["norm", "/nonexistent.json", "--groupoid", "pair:2"],
    ["field", "--family", "nope"],
    ["field", "--family", "z2-linear", "--grid", "0"],
    ["bogus-command"],
])
def test_config_errors_exit_two(argv, capsys):
    assert cli.main(argv) == 2


def test_bad_tolerance_env_exits_two(monkeypatch, capsys):
    monkeypatch.setenv("OGK_TOLERANCE", "-1")
    assert cli.main(["check", "norms", "--trials", "5"]) == 2
    monkeypatch.setenv("OGK_TOLERANCE", "abc")
    assert cli.main(["check", "norms", "--trials", "5"]) == 2


def test_field_csv(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _, err = run(["field", "--family", "z2-linear", "--grid", "32", "--refine", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 65
    assert float(rows[0]["norm"]) == pytest.approx(2 ** 0.5, abs=1e-12)
    assert "ratio" in err and "closed-form error" in err
