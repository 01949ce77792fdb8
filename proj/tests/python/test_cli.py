"""CLI contract tests: exit codes and JSON-on-stderr error reporting."""

import json
import os
import pathlib
import subprocess

import pytest

CLI = os.environ.get("NUMPAR_CLI")
DATA = pathlib.Path(os.environ.get("NUMPAR_DATA", "data"))

pytestmark = pytest.mark.skipif(CLI is None, reason="NUMPAR_CLI not set")


def run_cli(*args, cwd=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, cwd=cwd)


def stderr_error(result):
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    return payload["error"]


def test_missing_data_dir_is_io_error(tmp_path):
    result = run_cli("analyze", "--out", str(tmp_path))
    assert result.returncode == 1
    error = stderr_error(result)
    assert error["kind"] == "IoError"
    assert "no input files" in error["message"]


def test_unknown_flag_is_usage_error():
    result = run_cli("analyze", "--nope")
    assert result.returncode == 2
    assert stderr_error(result)["kind"] == "UsageError"


def test_fit_rejects_scheme_both(tmp_path):
    result = run_cli("fit", "--scheme", "both", "--out", str(tmp_path))
    assert result.returncode == 2
    assert stderr_error(result)["kind"] == "InvalidArgument"


def test_validation_failure_exits_two(tmp_path):
    broken = tmp_path / "data"
    broken.mkdir()
    lines = (DATA / "fixtures" / "dekal.tsv").read_text().splitlines()
    kept = [line for line in lines if "\t57\t" not in line]
    (broken / "dekal.tsv").write_text("\n".join(kept) + "\n")

    out = tmp_path / "out"
    result = run_cli("analyze", "--data", str(broken), "--out", str(out))
    assert result.returncode == 2
    report = json.loads((out / "validation_report.json").read_text())
    assert report["issues"][0]["kind"] == "MissingCardinality"
    assert report["issues"][0]["cardinality"] == 57


def test_analyze_ok_exits_zero(tmp_path):
    result = run_cli(
        "analyze", "--data", str(DATA / "fixtures"), "--out", str(tmp_path), "--scheme", "both"
    )
    assert result.returncode == 0
    lines = (tmp_path / "points.csv").read_text().splitlines()
    assert len(lines) == 7  # header + 6 rows
