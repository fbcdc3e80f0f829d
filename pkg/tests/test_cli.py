import json
import pathlib
import subprocess
import sys

import pytest

from wittenfact import cli

ROOT = pathlib.Path(__file__).resolve().parents[1]
EXAMPLES = sorted((ROOT / "docs" / "examples").glob("*.json"))
GOLDEN = ROOT / "tests" / "golden"


def write(tmp_path, data, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_corpus_covers_every_task():
    tasks = {json.loads(p.read_text())["task"] for p in EXAMPLES}
    assert tasks == set(cli.TASKS)
    assert len(EXAMPLES) >= 10


def test_shipped_schema_matches_docs():
    assert json.loads((ROOT / "docs" / "manifest.schema.json").read_text()) == cli.load_schema()


@pytest.mark.parametrize("path", EXAMPLES, ids=lambda p: p.stem)
def test_golden_reports(path):
    status, report = cli.run_manifest(json.loads(path.read_text()))
    codes = json.loads((GOLDEN / "exit_codes.json").read_text())
    assert status == codes[path.name]
    assert cli.dumps(report).encode() == (GOLDEN / (path.stem + ".report.json")).read_bytes()


def test_validate_command(tmp_path, capsys):
    good = str(ROOT / "docs" / "examples" / "rees-weyl.json")
    assert cli.main(["validate", good]) == 0
    assert capsys.readouterr().out.strip() == "ok"
    bad = write(tmp_path, {"version": "1", "task": "rees", "payload": {"bounds": [1, 2, 3], "extra": 1}})
    assert cli.main(["validate", bad]) == 2
    assert "$.payload" in capsys.readouterr().err


def test_unknown_task_is_a_schema_error(tmp_path, capsys):
    m = {"version": "1", "task": "integrate", "payload": {}}
    assert cli.main(["validate", write(tmp_path, m)]) == 2
    assert "$.task" in capsys.readouterr().err


def test_schema_error_reports_field_path(tmp_path, capsys):
    m = {"version": "1", "task": "hochschild",
         "payload": {"algebra": {"standard": "dual-numbers"}, "max_degree": "two"}}
    assert cli.main(["run", write(tmp_path, m)]) == 2
    assert "$.payload.max_degree" in capsys.readouterr().err


def test_associativity_failure_names_the_triple(capsys):
    path = str(ROOT / "docs" / "examples" / "hochschild-bad-associativity.json")
    assert cli.main(["validate", path]) == 2
    assert "(a, a, a)" in capsys.readouterr().err


def test_precondition_failure_exit_code(capsys):
    path = str(ROOT / "docs" / "examples" / "classes-p2-witten-limit.json")
    assert cli.main(["run", path]) == 3
    err = capsys.readouterr().err
    assert '"h^2": "3/2"' in err


def test_budget_exit_code(tmp_path):
    m = {"version": "1", "task": "hochschild", "options": {"budget": 100},
         "payload": {"algebra": {"standard": "M2"}, "max_degree": 3}}
    assert cli.main(["run", write(tmp_path, m)]) == 3


def test_check_failure_still_writes_report(tmp_path):
    out = tmp_path / "r.json"
    path = str(ROOT / "docs" / "examples" / "bd-check-mutated.json")
    assert cli.main(["run", path, "--out", str(out)]) == 4
    report = json.loads(out.read_text())
    assert report["result"]["passed"] is False


def test_q_order_override(tmp_path, capsys):
    path = str(ROOT / "docs" / "examples" / "eisenstein-e4.json")
    assert cli.main(["run", path, "--q-order", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["result"]["series"]["coefficients"] == ["1/120", "2", "18", "56"]
    assert report["provenance"]["options"] == {"q_order": 3}


def test_convention_override(tmp_path, capsys):
    path = str(ROOT / "docs" / "examples" / "fh-circle-qxq-long-arc.json")
    assert cli.main(["run", path, "--convention", "distinct"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["provenance"]["convention"] == "distinct"
    assert report["result"]["dims"] == [2, 0]
    assert cli.main(["run", path, "--convention", "bogus"]) == 2


def test_fh_report_has_verdict(capsys):
    path = str(ROOT / "docs" / "examples" / "fh-circle-m2.json")
    assert cli.main(["run", path]) == 0
    result = json.loads(capsys.readouterr().out)["result"]
    assert result["verdict"] == "matches HH"
    assert result["dims"] == result["hh_dims"] == [1, 0]


def test_reports_are_byte_identical_across_runs(tmp_path):
    for path in EXAMPLES[:5]:
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        cli.main(["run", str(path), "--out", str(a)])
        cli.main(["run", str(path), "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    path = str(ROOT / "docs" / "examples" / "genus-p1xp1.json")
    proc = subprocess.run([sys.executable, "-m", "wittenfact", "run", path], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["todd"] == "1"


def test_unreadable_manifest(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.main(["validate", str(p)]) == 2
