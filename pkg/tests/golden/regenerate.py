"""Rewrite the golden reports from docs/examples.  Run only after reviewing a diff.

Each manifest NAME.json gets NAME.report.json holding the exact bytes the
CLI writes, and exit_codes.json maps manifest names to exit codes.
"""

import json
import pathlib

from wittenfact.cli import dumps, run_manifest

ROOT = pathlib.Path(__file__).resolve().parents[2]
HERE = pathlib.Path(__file__).parent

if __name__ == "__main__":
    codes = {}
    for old in HERE.glob("*.report.json"):
        old.unlink()
    for path in sorted((ROOT / "docs" / "examples").glob("*.json")):
        status, report = run_manifest(json.loads(path.read_text()))
        (HERE / (path.stem + ".report.json")).write_text(dumps(report))
        codes[path.name] = status
    (HERE / "exit_codes.json").write_text(json.dumps(codes, indent=2, sort_keys=True) + "\n")
    print(json.dumps(codes, indent=2, sort_keys=True))
