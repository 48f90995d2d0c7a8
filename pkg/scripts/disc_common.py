#!/usr/bin/env python3
"""
Disc Common Module
==================
Shared plumbing for the jdisc scripts: config/preset loading with environment
expansion, setting resolution, solver settings, the error hierarchy and the
loguru setup.

Usage:
    from disc_common import CONFIG, load_settings, SolverSettings, HypothesisError
"""

import copy
import json
import os
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from loguru import logger

ROOT_DIR = Path(__file__).parent.parent
CONFIG_PATH = ROOT_DIR / "config.yaml"
PRESETS_PATH = ROOT_DIR / "presets.yaml"

_DEFAULT_PATTERN = re.compile(r"\$\{(\w+):-([^}]*)\}")


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class JDiscError(Exception):
    """Base error of the jdisc scripts."""

    exit_code = 1


class HypothesisError(JDiscError):
    """A precondition or hypothesis of an operation does not hold."""

    exit_code = 1


class StructureError(HypothesisError):
    """Invalid almost complex structure (J^2 != -I, J + J_st singular, ...)."""


class DomainError(HypothesisError):
    """A point, stencil or disc leaves the domain it must stay in."""


class DivergenceError(JDiscError):
    """Picard divergence, Newton stagnation or a failed continuation."""

    exit_code = 2


class ConfigError(JDiscError):
    """Unreadable config, unknown preset or bad setting."""

    exit_code = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, JDiscError):
        return exc.exit_code
    return 1


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------

def expand_env_vars(obj):
    """Recursively expand environment variables in config values.

    Supports ``${VAR:-default}`` in addition to ``$VAR``/``${VAR}`` and ``~``.
    """
    if isinstance(obj, dict):
        return {k: expand_env_vars(v) for k, v in obj.items()}
    elif isinstance(obj, list):
        return [expand_env_vars(item) for item in obj]
    elif isinstance(obj, str):
        expanded = _DEFAULT_PATTERN.sub(lambda m: os.environ.get(m.group(1), m.group(2)), obj)
        expanded = os.path.expandvars(expanded)
        expanded = os.path.expanduser(expanded)
        return expanded
    return obj


def _read_mapping(path: Path) -> Dict[str, Any]:
    with open(path) as f:
        if path.suffix.lower() == ".json":
            data = json.load(f)
        else:
            data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """Load config.yaml (or ``path``) with environment expansion."""
    config_path = Path(path) if path else CONFIG_PATH
    if config_path.exists():
        try:
            return expand_env_vars(_read_mapping(config_path))
        except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
            if path:
                raise ConfigError(f"Failed to load {config_path}: {e}") from e
            logger.warning(f"Failed to load config.yaml: {e}")
    elif path:
        raise ConfigError(f"Config not found: {config_path}")
    return {}


def load_presets(path: Optional[Path] = None) -> Dict[str, Any]:
    """Load structure presets from presets.yaml"""
    presets_path = Path(path) if path else PRESETS_PATH
    if presets_path.exists():
        try:
            with open(presets_path) as f:
                return yaml.safe_load(f) or {}
        except Exception as e:
            logger.warning(f"Failed to load presets.yaml: {e}")
    return {}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Return ``base`` updated recursively with ``override`` (neither is modified)."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def get_path(config: Dict[str, Any], dotted: str, default: Any = None) -> Any:
    """Safe nested lookup: ``get_path(cfg, "solver.tol")``."""
    cur: Any = config
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return default
        cur = cur[part]
    return cur


def resolve_setting(
    cli_value: Any,
    config: Dict[str, Any],
    config_path: str,
    preset: Optional[Dict[str, Any]] = None,
    preset_key: Optional[str] = None,
    env_var: Optional[str] = None,
    default: Any = None,
) -> Any:
    """
    Resolve one setting.

    Priority: CLI > preset > config > environment > default.
    The experiment config is expected to be merged into ``config`` already.
    """
    if cli_value is not None:
        return cli_value
    if preset and preset_key and preset.get(preset_key) is not None:
        return preset[preset_key]
    value = get_path(config, config_path)
    if value is not None:
        return value
    if env_var and os.environ.get(env_var):
        return os.environ[env_var]
    return default


def load_settings(experiment_config: Optional[Path] = None) -> Dict[str, Any]:
    """config.yaml deep-merged with an optional experiment config (JSON or YAML)."""
    base = load_config()
    if experiment_config is None:
        return base
    override = load_config(Path(experiment_config))
    return deep_merge(base, override)


# ---------------------------------------------------------------------------
# Solver settings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and budgets shared by the disc solvers."""

    tol: float = 1e-8
    residual_tol: float = 1e-6
    max_iterations: int = 50
    max_outer: int = 20
    jet_tol: float = 1e-8
    newton_step: float = 1e-4
    divergence_window: int = 5
    stall_ratio: float = 0.5
    holomorphic_tol: float = 5e-2
    damping_min: float = 1.0 / 64.0

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None) -> "SolverSettings":
        section = get_path(config or {}, "solver", {}) or {}
        kwargs = {}
        for f in fields(cls):
            if f.name in section and section[f.name] is not None:
                try:
                    kwargs[f.name] = type(f.default)(section[f.name])
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"solver.{f.name}: {e}") from e
        settings = cls(**kwargs)
        if settings.tol <= 0 or settings.max_iterations < 1:
            raise ConfigError("solver.tol must be > 0 and solver.max_iterations >= 1")
        return settings


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

def configure_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    """Install loguru sinks: stderr plus an optional rotating log file."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_file, level="DEBUG", rotation="5 MB", retention=3)


# Initialize
CONFIG = load_config()
PRESETS = load_presets()
