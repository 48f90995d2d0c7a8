#!/usr/bin/env python3
"""
Tests for disc_common.py - Config loading, setting resolution and errors
"""

import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

import pytest

from disc_common import (CONFIG, ConfigError, DivergenceError, DomainError, HypothesisError, StructureError,
                         deep_merge, exit_code_for, expand_env_vars, get_path, load_config, load_settings,
                         resolve_setting)


class TestEnvExpansion:
    """Test ${VAR:-default} expansion"""

    def test_default_used(self, monkeypatch):
        """Unset variables take the default"""
        monkeypatch.delenv("JDISC_TEST_DIR", raising=False)
        assert expand_env_vars({"a": "${JDISC_TEST_DIR:-output}"}) == {"a": "output"}

    def test_variable_wins(self, monkeypatch):
        """Set variables replace the default, also inside lists"""
        monkeypatch.setenv("JDISC_TEST_DIR", "/tmp/x")
        assert expand_env_vars(["${JDISC_TEST_DIR:-output}/r"]) == ["/tmp/x/r"]

    def test_non_strings_untouched(self):
        """Numbers pass through"""
        assert expand_env_vars({"tol": 1e-8, "n": [1, 2]}) == {"tol": 1e-8, "n": [1, 2]}


class TestConfig:
    """Test config files and merging"""

    def test_repo_config_loaded(self):
        """config.yaml provides the solver and grid sections as numbers"""
        assert isinstance(get_path(CONFIG, "solver.tol"), float)
        assert get_path(CONFIG, "grid.N") == 64

    def test_deep_merge(self):
        """Nested keys merge; inputs are not modified"""
        base = {"solver": {"tol": 1e-8, "max_iterations": 50}, "grid": {"N": 64}}
        merged = deep_merge(base, {"solver": {"tol": 1e-6}})
        assert merged["solver"] == {"tol": 1e-6, "max_iterations": 50}
        assert base["solver"]["tol"] == 1e-8

    def test_experiment_config(self, tmp_path):
        """An experiment config overrides config.yaml"""
        path = tmp_path / "exp.yaml"
        path.write_text("grid:\n  N: 32\n")
        cfg = load_settings(path)
        assert cfg["grid"]["N"] == 32
        assert "solver" in cfg

    def test_json_config(self, tmp_path):
        """JSON configs are accepted"""
        path = tmp_path / "exp.json"
        path.write_text('{"grid": {"N": 48}}')
        assert load_config(path) == {"grid": {"N": 48}}

    def test_missing_config(self, tmp_path):
        """A missing explicit config raises ConfigError"""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.yaml")

    def test_non_mapping(self, tmp_path):
        """Top level must be a mapping"""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_get_path_default(self):
        """Missing keys give the default"""
        assert get_path({"a": {"b": 1}}, "a.c", 5) == 5
        assert get_path({"a": 1}, "a.b") is None


class TestResolveSetting:
    """Test CLI > preset > config > environment > default"""

    def test_priority(self, monkeypatch):
        """Each level is used when the ones above are missing"""
        monkeypatch.setenv("JDISC_TEST_VALUE", "env")
        cfg = {"paths": {"output_dir": "cfg"}}
        assert resolve_setting("cli", cfg, "paths.output_dir", {"out": "preset"}, "out", "JDISC_TEST_VALUE") == "cli"
        assert resolve_setting(None, cfg, "paths.output_dir", {"out": "preset"}, "out", "JDISC_TEST_VALUE") == "preset"
        assert resolve_setting(None, cfg, "paths.output_dir", env_var="JDISC_TEST_VALUE") == "cfg"
        assert resolve_setting(None, {}, "paths.output_dir", env_var="JDISC_TEST_VALUE") == "env"
        monkeypatch.delenv("JDISC_TEST_VALUE")
        assert resolve_setting(None, {}, "paths.output_dir", env_var="JDISC_TEST_VALUE", default="d") == "d"


class TestErrors:
    """Test the error hierarchy and exit codes"""

    @pytest.mark.parametrize("exc,code", [
        (HypothesisError("h"), 1),
        (StructureError("s"), 1),
        (DomainError("d"), 1),
        (DivergenceError("v"), 2),
        (ConfigError("c"), 3),
        (RuntimeError("other"), 1),
    ])
    def test_exit_codes(self, exc, code):
        """Each error maps to its CLI exit code"""
        assert exit_code_for(exc) == code

    def test_subclasses(self):
        """Structure and domain errors are hypothesis errors"""
        assert issubclass(StructureError, HypothesisError)
        assert issubclass(DomainError, HypothesisError)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
