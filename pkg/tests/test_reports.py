#!/usr/bin/env python3
"""
Tests for reports.py and summarize_reports.py - Result tables, report JSON
and aggregation to CSV/Markdown
"""

import pathlib
import subprocess
import sys

import numpy as np
import pytest

# Add scripts to path
SCRIPTS_DIR = pathlib.Path(__file__).parent.parent / "scripts"
sys.path.insert(0, str(SCRIPTS_DIR))

from reports import (RUNTIME_KEY, ResultTable, config_hash, load_report, report_hash, stamp_runtime,
                     summary_row, trend_slope, write_csv, write_md, write_report_json)
import summarize_reports


def make_table(name="cz", values=((0.1, 1.2), (0.01, 2.3)), summary=None, seconds=1.5):
    table = ResultTable(name=name, columns=["delta", "value"], metadata={"N": 64, "config_hash": "abc123"})
    for row in values:
        table.add_row(*row)
    if summary:
        table.metadata["summary"] = summary
    stamp_runtime(table, seconds)
    return table


class TestResultTable:
    """Test ResultTable behavior"""

    def test_row_width_checked(self):
        """Rows must match the columns"""
        table = ResultTable(name="t", columns=["a", "b"])
        with pytest.raises(ValueError):
            table.add_row(1.0)

    def test_nonfinite_rejected(self):
        """NaN becomes None and fails validation"""
        table = ResultTable(name="t", columns=["a"])
        table.add_row(float("nan"))
        assert table.rows[0] == [None]
        with pytest.raises(ValueError):
            table.validate()

    def test_failed_rows_allowed(self):
        """Rows with a non-ok status may hold None"""
        table = ResultTable(name="t", columns=["status", "a"])
        table.add_row("divergence", None)
        table.add_row("ok", 1.0)
        table.validate()
        assert table.ok_rows() == [["ok", 1.0]]

    def test_numpy_and_complex_cleaned(self):
        """numpy scalars unwrap and complex values become pairs"""
        table = ResultTable(name="t", columns=["a", "b"])
        table.add_row(np.float64(0.5), 1 + 2j)
        assert table.rows[0] == [0.5, [1.0, 2.0]]

    def test_column_as_array(self):
        """column() returns floats"""
        assert make_table().column("value").tolist() == [1.2, 2.3]


class TestHashes:
    """Test config and report hashes"""

    def test_config_hash_order_independent(self):
        """Key order does not change the hash"""
        assert config_hash({"a": 1, "b": {"c": 2}}) == config_hash({"b": {"c": 2}, "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_runtime_excluded(self):
        """Runtime does not enter the report hash"""
        a = make_table(seconds=1.0).to_dict()
        b = make_table(seconds=9.0).to_dict()
        assert a["metadata"][RUNTIME_KEY] != b["metadata"][RUNTIME_KEY]
        assert report_hash(a) == report_hash(b)

    def test_rows_change_hash(self):
        """Different rows give different hashes"""
        a = make_table().to_dict()
        b = make_table(values=((0.1, 1.2),)).to_dict()
        assert report_hash(a) != report_hash(b)

    def test_written_hash_verifies(self, tmp_path):
        """The stored report_hash matches a recomputation"""
        path = write_report_json(make_table(), tmp_path / "cz" / "report.json")
        report = load_report(path)
        assert report["report_hash"] == report_hash(report)

    def test_trend_slope(self):
        """Slope of a line; degenerate input gives 0"""
        assert trend_slope([0, 1, 2], [1, 3, 5]) == pytest.approx(2.0)
        assert trend_slope([1, 1], [0, 5]) == 0.0


class TestWriters:
    """Test CSV and Markdown output"""

    def test_csv(self, tmp_path):
        """CSV has the header and one line per row"""
        path = write_csv(make_table(), tmp_path / "t.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "delta,value"
        assert len(lines) == 3

    def test_md_no_data(self, tmp_path):
        """An empty summary says so"""
        path = write_md([], ["name"], tmp_path / "e.md", "ts")
        assert "_No data found._" in path.read_text()

    def test_summary_row(self):
        """Summary keys follow the base fields"""
        report = make_table(summary={"max_error": 0.01}).to_dict()
        row = summary_row(report, source="x/report.json")
        assert row["name"] == "cz"
        assert row["N"] == 64
        assert row["rows"] == 2
        assert row["seconds"] == 1.5
        assert row["max_error"] == 0.01
        assert row["source"] == "x/report.json"


class TestSummarize:
    """Test summarize_reports.py aggregation"""

    def _write(self, root, name, summary, seconds):
        write_report_json(make_table(name=name, summary=summary, seconds=seconds),
                          root / name / "report.json")

    def test_aggregate(self, tmp_path):
        """Two reports become two rows in CSV and Markdown"""
        self._write(tmp_path, "cz", {"max_error": 0.02}, 2.0)
        self._write(tmp_path, "tcg-test", {"max_error": 0.01, "passed": 1.0}, 1.0)
        outdir = tmp_path / "out"
        rc = summarize_reports.main(["--glob", str(tmp_path / "**" / "report.json"), "--outdir", str(outdir)])
        assert rc == 0
        md = next(outdir.glob("experiments_*.md")).read_text()
        csv_text = next(outdir.glob("experiments_*.csv")).read_text()
        assert "| cz |" in md and "| tcg-test |" in md
        assert csv_text.splitlines()[0].startswith("name,structure,N,rows,config_hash,seconds")
        assert "passed" in csv_text.splitlines()[0]

    def test_sort_and_filter(self, tmp_path):
        """--sort -seconds puts the slowest first; --name filters"""
        self._write(tmp_path, "cz", {}, 2.0)
        self._write(tmp_path, "r6", {}, 5.0)
        rows = summarize_reports.collect(str(tmp_path / "**" / "report.json"))
        rows = summarize_reports.sort_rows(rows, "-seconds")
        assert [r["name"] for r in rows] == ["r6", "cz"]

        outdir = tmp_path / "out"
        summarize_reports.main(["--glob", str(tmp_path / "**" / "report.json"), "--outdir", str(outdir),
                                "--name", "cz"])
        md = next(outdir.glob("experiments_*.md")).read_text()
        assert "| cz |" in md and "| r6 |" not in md

    def test_none_sorted_last(self):
        """Missing values sort after numbers"""
        rows = [{"x": None}, {"x": 2.0}, {"x": 1.0}]
        assert [r["x"] for r in summarize_reports.sort_rows(rows, "x")] == [1.0, 2.0, None]

    def test_broken_report_skipped(self, tmp_path):
        """Unreadable JSON is skipped"""
        bad = tmp_path / "bad" / "report.json"
        bad.parent.mkdir()
        bad.write_text("{not json")
        self._write(tmp_path, "cz", {}, 1.0)
        rows = summarize_reports.collect(str(tmp_path / "**" / "report.json"))
        assert [r["name"] for r in rows] == ["cz"]

    def test_cli_subprocess(self, tmp_path):
        """The script runs standalone"""
        self._write(tmp_path, "cz", {}, 1.0)
        cmd = [sys.executable, str(SCRIPTS_DIR / "summarize_reports.py"),
               "--glob", str(tmp_path / "**" / "report.json"), "--outdir", str(tmp_path / "out")]
        r = subprocess.run(cmd, capture_output=True, text=True)
        assert r.returncode == 0, f"Summary failed: {r.stderr}"
        assert "Rows: 1" in r.stdout


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
