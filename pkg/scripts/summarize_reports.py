#!/usr/bin/env python3
"""
Summarize Reports - Aggregate experiment reports
Converts many report.json files into one CSV and one Markdown table
"""
import argparse
import csv
import datetime as dt
import pathlib
import sys
from glob import glob

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from reports import load_report, summary_row, write_md

BASE_FIELDS = ["name", "structure", "N", "rows", "config_hash", "seconds"]


def collect(pattern: str):
    """Summary rows for every readable report matching the glob"""
    rows = []
    for f in sorted(glob(pattern, recursive=True)):
        try:
            rows.append(summary_row(load_report(pathlib.Path(f)), source=f))
        except (OSError, ValueError) as e:
            print(f"[skip] {f}: {e}")
    return rows


def fields_for(rows):
    """Base fields first, then every summary key in first-seen order"""
    fields = list(BASE_FIELDS)
    for r in rows:
        for k in r:
            if k not in fields and k != "source":
                fields.append(k)
    return fields + ["source"]


def _sort_key(v):
    # None last, numbers before strings
    if v is None:
        return (2, 0.0, "")
    if isinstance(v, str):
        return (1, 0.0, v)
    return (0, float(v), "")


def sort_rows(rows, spec: str):
    # Format: "key1,-key2" (- prefix for descending)
    keys = [k.strip() for k in spec.split(",") if k.strip()]
    for k in reversed(keys):
        rev = k.startswith("-")
        kk = k[1:] if rev else k
        rows.sort(key=lambda r: _sort_key(r.get(kk)), reverse=rev)
    return rows


def write_csv(rows, fields, path: pathlib.Path):
    """Write rows to CSV file"""
    if not rows:
        path.write_text("", encoding="utf-8")
        return

    with path.open("w", newline="", encoding="utf-8") as fp:
        w = csv.DictWriter(fp, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: "" if r.get(k) is None else r.get(k) for k in fields})


def main(argv=None):
    """CLI interface"""
    ap = argparse.ArgumentParser(
        description="Aggregate experiment report.json files to CSV/Markdown."
    )
    ap.add_argument("--glob", dest="pattern", default="output/**/report.json",
                    help="Glob pattern to find reports")
    ap.add_argument("--outdir", default="output/reports",
                    help="Output directory")
    ap.add_argument("--name", default="",
                    help="Only reports of this experiment")
    ap.add_argument("--sort", default="",
                    help="Sort key (e.g., name,-seconds)")
    ap.add_argument("--limit", type=int, default=0,
                    help="Limit number of rows")
    args = ap.parse_args(argv)

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    rows = collect(args.pattern)
    if args.name:
        rows = [r for r in rows if r.get("name") == args.name]
    if args.sort:
        rows = sort_rows(rows, args.sort)
    if args.limit > 0:
        rows = rows[:args.limit]

    fields = fields_for(rows)
    ts = dt.datetime.now().strftime("%Y%m%d_%H%M%S")
    csvp = outdir / f"experiments_{ts}.csv"
    mdp = outdir / f"experiments_{ts}.md"

    write_csv(rows, fields, csvp)
    write_md(rows, fields, mdp, ts)

    print(f"CSV: {csvp}\nMD:  {mdp}\nRows: {len(rows)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
