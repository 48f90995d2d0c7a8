#!/usr/bin/env python3
"""
jdisc - command line for J-holomorphic disc experiments

    python scripts/jdisc.py r6 --grid 64 --seed 7
    python scripts/jdisc.py psconvex --config configs/psconvex.yaml --csv
    python scripts/jdisc.py jet --structure "chirka-perturbed(0.05)" --set "v=[[0.3, 0, 0, 0]]"
    python scripts/jdisc.py cz --delta-list 1e-1,1e-3,1e-6
    python scripts/jdisc.py kobayashi --inside ball:2 --point 0,0 --vector 1,0 --budget 30

Every command resolves config.yaml (+ --config), applies the CLI overrides to
``experiments.<command>``, runs the experiment and writes report JSON.
Exit codes: 0 ok, 1 hypothesis violated, 2 divergence, 3 bad config.
"""

import pathlib
import sys
from typing import Any, Dict, List, Optional

import typer
import yaml
from loguru import logger
from rich.console import Console
from rich.table import Table
from slugify import slugify

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from disc_common import (ConfigError, JDiscError, configure_logging, deep_merge, exit_code_for, get_path,
                         load_settings, resolve_setting)
from experiments import EXPERIMENTS
from reports import ResultTable, write_csv, write_report_json

app = typer.Typer(help="J-holomorphic discs via Cauchy-Green inversion", no_args_is_help=True)
console = Console(stderr=True)

SUMMARY_ROWS = 12


def parse_overrides(items: List[str]) -> Dict[str, Any]:
    """'key=value' pairs; values parsed as YAML so lists and numbers work."""
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        try:
            out[key.strip()] = yaml.safe_load(value)
        except yaml.YAMLError as e:
            raise ConfigError(f"--set {key}: {e}") from e
    return out


def parse_number_list(flag: str, raw: str) -> List[float]:
    """'1e-1,1e-2' (commas or semicolons) as a list of floats."""
    items = [v.strip() for v in str(raw).replace(";", ",").split(",") if v.strip()]
    try:
        values = [float(v) for v in items]
    except ValueError as e:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {raw!r}") from e
    if not values:
        raise ConfigError(f"{flag} is empty")
    return values


def parse_budget(flag: str, raw: str) -> int:
    try:
        budget = int(str(raw).strip())
    except ValueError as e:
        raise ConfigError(f"{flag} expects an integer, got {raw!r}") from e
    if budget < 1:
        raise ConfigError(f"{flag} must be >= 1, got {budget}")
    return budget


def parse_domain(flag: str, raw: str) -> str:
    spec = str(raw).strip()
    if not spec:
        raise ConfigError(f"{flag} is empty")
    return spec


# experiments.<command> key -> (flag, parser)
COMMAND_FLAGS = {
    "deltas": ("--delta-list", parse_number_list),
    "inside": ("--inside", parse_domain),
    "point": ("--point", parse_number_list),
    "vector": ("--vector", parse_number_list),
    "budget": ("--budget", parse_budget),
}


def resolve(name: str, config: Optional[pathlib.Path], grid: Optional[int], structure: Optional[str],
            seed: Optional[int], overrides: List[str],
            flags: Optional[Dict[str, Optional[str]]] = None) -> Dict[str, Any]:
    """config.yaml (+ --config) with the command options merged into experiments.<name>."""
    if config is not None and not config.exists():
        raise ConfigError(f"config not found: {config}")
    cfg = load_settings(config)
    section = parse_overrides(overrides)
    if grid is not None:
        section["N"] = grid
    if structure:
        section["structure"] = structure
    if seed is not None:
        section["seed"] = seed
    for key, raw in (flags or {}).items():
        if raw is not None:
            flag, parse = COMMAND_FLAGS[key]
            section[key] = parse(flag, raw)
    key = name.replace("-", "_")
    return deep_merge(cfg, {"experiments": {key: section}})


def default_out(cfg: Dict[str, Any], table: ResultTable) -> pathlib.Path:
    out_dir = pathlib.Path(resolve_setting(None, cfg, "paths.output_dir", env_var="JDISC_OUTPUT_DIR", default="output"))
    label = table.name
    if table.metadata.get("structure"):
        label += f"-{table.metadata['structure']}"
    return out_dir / slugify(label)[:80] / "report.json"


def print_summary(table: ResultTable) -> None:
    view = Table(title=table.name, show_lines=False)
    for col in table.columns:
        view.add_column(col, justify="right")
    for row in table.rows[:SUMMARY_ROWS]:
        view.add_row(*("" if v is None else f"{v:.4g}" if isinstance(v, float) else str(v) for v in row))
    if len(table.rows) > SUMMARY_ROWS:
        view.caption = f"{len(table.rows) - SUMMARY_ROWS} more rows in the report"
    console.print(view)
    for key, value in (table.metadata.get("summary") or {}).items():
        console.print(f"  {key}: {value}")


def run_experiment(name: str, config: Optional[pathlib.Path], out: Optional[pathlib.Path], csv: bool,
                   grid: Optional[int], structure: Optional[str], seed: Optional[int],
                   overrides: List[str], verbose: bool, quiet: bool = False,
                   flags: Optional[Dict[str, Optional[str]]] = None) -> ResultTable:
    configure_logging(verbose)
    try:
        cfg = resolve(name, config, grid, structure, seed, overrides, flags)
        log_file = get_path(cfg, "logging.file")
        if log_file:
            configure_logging(verbose, log_file)
        table = EXPERIMENTS[name](cfg)
        path = write_report_json(table, out or default_out(cfg, table))
        if csv:
            write_csv(table, path.with_suffix(".csv"))
    except JDiscError as e:
        logger.error(f"{name}: {e}")
        raise typer.Exit(exit_code_for(e))
    if not quiet:
        print_summary(table)
    logger.success(f"{name} -> {path}")
    return table


def _finish(name: str, table: ResultTable) -> None:
    summary = table.metadata.get("summary") or {}
    if "passed" in summary and not summary["passed"]:
        logger.error(f"{name}: max error {summary.get('max_error')} above tol {summary.get('tol')}")
        raise typer.Exit(1)


def _doc(name: str) -> str:
    return (EXPERIMENTS[name].__doc__ or name).strip().splitlines()[0]


def _register(name: str) -> None:
    def command(
        config: Optional[pathlib.Path] = typer.Option(None, "--config", "-c", help="Experiment config (YAML/JSON)"),
        out: Optional[pathlib.Path] = typer.Option(None, "--out", "-o", help="Report JSON path"),
        csv: bool = typer.Option(False, "--csv", help="Also write the table as CSV"),
        grid: Optional[int] = typer.Option(None, "--grid", "-N", help="Grid size N (even)"),
        structure: Optional[str] = typer.Option(None, "--structure", "-s", help="Preset, preset(eps), preset:n or file"),
        seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
        overrides: List[str] = typer.Option([], "--set", help="key=value for experiments.<command>"),
        verbose: bool = typer.Option(False, "--verbose", "-v"),
        quiet: bool = typer.Option(False, "--quiet", "-q", help="No summary table"),
    ):
        table = run_experiment(name, config, out, csv, grid, structure, seed, overrides, verbose, quiet)
        _finish(name, table)

    command.__doc__ = _doc(name)
    app.command(name=name)(command)


for _name in EXPERIMENTS:
    if _name not in ("cz", "kobayashi"):
        _register(_name)


# Flag values are parsed in resolve() so malformed input exits with 3.

@app.command("cz")
def cz_command(
    delta_list: Optional[str] = typer.Option(None, "--delta-list", help="Comma-separated deltas, e.g. 1e-1,1e-3,1e-6"),
    config: Optional[pathlib.Path] = typer.Option(None, "--config", "-c", help="Experiment config (YAML/JSON)"),
    out: Optional[pathlib.Path] = typer.Option(None, "--out", "-o", help="Report JSON path"),
    csv: bool = typer.Option(False, "--csv", help="Also write the table as CSV"),
    grid: Optional[int] = typer.Option(None, "--grid", "-N", help="Grid size N (even)"),
    overrides: List[str] = typer.Option([], "--set", help="key=value for experiments.cz"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No summary table"),
):
    """PV integral sweep over a list of deltas (--delta-list)."""
    table = run_experiment("cz", config, out, csv, grid, None, None, overrides, verbose, quiet,
                           flags={"deltas": delta_list})
    _finish("cz", table)


@app.command("kobayashi")
def kobayashi_command(
    inside: Optional[str] = typer.Option(None, "--inside", help="everywhere, ball:R, sublevel:<expr>, polydisc-punctured[:R]"),
    point: Optional[str] = typer.Option(None, "--point", help="Base point, comma-separated real coordinates"),
    vector: Optional[str] = typer.Option(None, "--vector", help="Tangent vector, comma-separated"),
    budget: Optional[str] = typer.Option(None, "--budget", help="Maximum number of disc solves"),
    config: Optional[pathlib.Path] = typer.Option(None, "--config", "-c", help="Experiment config (YAML/JSON)"),
    out: Optional[pathlib.Path] = typer.Option(None, "--out", "-o", help="Report JSON path"),
    csv: bool = typer.Option(False, "--csv", help="Also write the table as CSV"),
    grid: Optional[int] = typer.Option(None, "--grid", "-N", help="Grid size N (even)"),
    structure: Optional[str] = typer.Option(None, "--structure", "-s", help="Preset, preset(eps), preset:n or file"),
    overrides: List[str] = typer.Option([], "--set", help="key=value for experiments.kobayashi"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No summary table"),
):
    """Royden norm upper bound for --vector at --point inside --inside."""
    flags = {"inside": inside, "point": point, "vector": vector, "budget": budget}
    table = run_experiment("kobayashi", config, out, csv, grid, structure, None, overrides, verbose, quiet,
                           flags=flags)
    _finish("kobayashi", table)


@app.command("list")
def list_commands():
    """List experiments and their config sections."""
    for name, fn in EXPERIMENTS.items():
        doc = (fn.__doc__ or "").strip().splitlines()
        typer.echo(f"{name:14s} experiments.{name.replace('-', '_'):14s} {doc[0] if doc else ''}")


if __name__ == "__main__":
    app()
