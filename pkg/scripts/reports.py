#!/usr/bin/env python3
"""
Reports - ResultTable plus JSON/CSV/Markdown writers
Every experiment returns a ResultTable; the CLI writes it as report JSON with
an optional CSV mirror, and summarize_reports.py aggregates many of them.
"""
import csv
import datetime as dt
import hashlib
import json
import math
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

RUNTIME_KEY = "runtime"


def _clean(value):
    """JSON-safe scalar: numpy types unwrapped, NaN/inf -> None."""
    if isinstance(value, (np.generic,)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    return value


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(config: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON of a resolved config."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def trend_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of y against x (finite pairs only)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    if ok.sum() < 2 or np.ptp(x[ok]) == 0:
        return 0.0
    return float(np.polyfit(x[ok], y[ok], 1)[0])


@dataclass
class ResultTable:
    """Named columns of reals plus metadata and optional extra tables."""

    name: str
    columns: List[str]
    rows: List[list] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: row has {len(values)} values, expected {len(self.columns)}")
        self.rows.append([_clean(v) for v in values])

    def column(self, name: str) -> np.ndarray:
        """Column as float array (None -> nan)."""
        k = self.columns.index(name)
        return np.array([np.nan if r[k] is None else r[k] for r in self.rows], dtype=float)

    def add_table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
        self.tables[name] = {"columns": list(columns), "rows": [[_clean(v) for v in r] for r in rows]}

    def ok_rows(self) -> List[list]:
        """Rows whose status (if any) is 'ok'."""
        if "status" not in self.columns:
            return list(self.rows)
        k = self.columns.index("status")
        return [r for r in self.rows if r[k] == "ok"]

    def validate(self) -> None:
        """Rectangular, with finite numbers except in failed rows."""
        status = self.columns.index("status") if "status" in self.columns else None
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"{self.name}: ragged row {r}")
            if status is not None and r[status] != "ok":
                continue
            for v in r:
                if v is None or (isinstance(v, float) and not math.isfinite(v)):
                    raise ValueError(f"{self.name}: non-finite entry in row {r}")

    def to_dict(self, cfg_hash: str = "") -> Dict[str, Any]:
        return {
            "name": self.name,
            "config_hash": cfg_hash or self.metadata.get("config_hash", ""),
            "columns": list(self.columns),
            "rows": self.rows,
            "metadata": _clean(self.metadata),
            "tables": self.tables,
        }


def report_hash(report: Dict[str, Any]) -> str:
    """Hash of a report dict without metadata.runtime."""
    body = {k: v for k, v in report.items() if k != "report_hash"}
    meta = dict(body.get("metadata") or {})
    meta.pop(RUNTIME_KEY, None)
    body["metadata"] = meta
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def stamp_runtime(table: ResultTable, seconds: float) -> None:
    table.metadata[RUNTIME_KEY] = {
        "timestamp": dt.datetime.now().isoformat(timespec="seconds"),
        "seconds": round(float(seconds), 3),
    }


def write_report_json(table: ResultTable, path: pathlib.Path) -> pathlib.Path:
    """Write report JSON; returns the path."""
    table.validate()
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report = table.to_dict()
    report["report_hash"] = report_hash(report)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_report(path: pathlib.Path) -> Dict[str, Any]:
    return json.loads(pathlib.Path(path).read_text(encoding="utf-8"))


def write_csv(table: ResultTable, path: pathlib.Path) -> pathlib.Path:
    """Write the main table to CSV"""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fp:
        w = csv.writer(fp)
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow(["" if v is None else v for v in r])
    return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_md(rows: List[Dict[str, Any]], fields: Sequence[str], path: pathlib.Path, title_ts: str) -> pathlib.Path:
    """Write rows to a Markdown table"""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fp:
        fp.write(f"# Experiment Summary ({title_ts})\n\n")

        if not rows:
            fp.write("_No data found._\n")
            return path

        fp.write("| " + " | ".join(fields) + " |\n")
        fp.write("| " + " | ".join(["---"] * len(fields)) + " |\n")
        for r in rows:
            fp.write("| " + " | ".join(_fmt(r.get(k)) for k in fields) + " |\n")
    return path


def summary_row(report: Dict[str, Any], source: Optional[str] = None) -> Dict[str, Any]:
    """One summary row per report: name, hashes, size and the summary block."""
    meta = report.get("metadata") or {}
    row = {
        "name": report.get("name", ""),
        "structure": meta.get("structure"),
        "N": meta.get("N"),
        "rows": len(report.get("rows") or []),
        "config_hash": (report.get("config_hash") or "")[:12],
        "seconds": (meta.get(RUNTIME_KEY) or {}).get("seconds"),
    }
    for key, value in sorted((meta.get("summary") or {}).items()):
        row[key] = value
    if source:
        row["source"] = source
    return row
