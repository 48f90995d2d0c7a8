#!/usr/bin/env python3
"""
Tests for jdisc.py - Command line, overrides and exit codes
"""

import json
import sys
from pathlib import Path

# Add scripts to path
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

import pytest
from typer.testing import CliRunner

from disc_common import ConfigError
from jdisc import app, parse_overrides, resolve

runner = CliRunner()
CONFIGS = Path(__file__).parent.parent / "configs"


class TestOverrides:
    """Test --set parsing and config resolution"""

    def test_yaml_values(self):
        """Values are parsed as YAML"""
        out = parse_overrides(["A=10", "v=[[0.3, 0, 0, 0]]", "kind=loglinear"])
        assert out == {"A": 10, "v": [[0.3, 0, 0, 0]], "kind": "loglinear"}

    def test_missing_equals(self):
        """key without value is rejected"""
        with pytest.raises(ConfigError):
            parse_overrides(["novalue"])

    def test_resolve_merges_section(self):
        """--grid, --structure and --set land in experiments.<command>"""
        cfg = resolve("two-point", None, 32, "r6", None, ["q=[0.1, 0, 0, 0, 0, 0]"])
        sec = cfg["experiments"]["two_point"]
        assert sec["N"] == 32
        assert sec["structure"] == "r6"
        assert sec["q"] == [0.1, 0, 0, 0, 0, 0]

    def test_missing_config(self, tmp_path):
        """A --config path that does not exist is a ConfigError"""
        with pytest.raises(ConfigError):
            resolve("cz", tmp_path / "absent.yaml", None, None, None, [])

    @pytest.mark.parametrize("name, config, dilation", [
        ("psconvex", "psconvex-perturbed.yaml", 0.05),
        ("jet2", "jet2-perturbed.yaml", 0.03),
        ("family-2b", "family-2b-perturbed.yaml", 0.03),
    ])
    def test_perturbed_configs(self, name, config, dilation):
        """Shipped perturbed-structure configs merge over config.yaml"""
        cfg = resolve(name, CONFIGS / config, None, None, None, [])
        sec = cfg["experiments"][name.replace("-", "_")]
        assert sec["structure"] == "chirka-perturbed(0.05)"
        assert sec["dilation"] == dilation
        assert cfg["solver"]["max_iterations"] == 50

    def test_cz_deltas_reach_small_values(self):
        """The default cz sweep goes down to 1e-6"""
        cfg = resolve("cz", None, None, None, None, [])
        assert min(cfg["experiments"]["cz"]["deltas"]) == pytest.approx(1e-6)

    def test_command_flags_land_in_section(self):
        """--delta-list and the kobayashi flags are parsed into experiments.<command>"""
        cfg = resolve("cz", None, None, None, None, [], {"deltas": "1e-1, 1e-3;1e-6"})
        assert cfg["experiments"]["cz"]["deltas"] == [0.1, 0.001, 1e-6]
        flags = {"inside": "ball:2", "point": "0,0", "vector": "1, 0", "budget": "30"}
        sec = resolve("kobayashi", None, None, None, None, [], flags)["experiments"]["kobayashi"]
        assert sec == {"inside": "ball:2", "point": [0.0, 0.0], "vector": [1.0, 0.0], "budget": 30}

    def test_unset_flags_keep_config(self):
        """Flags left at None do not override the config"""
        cfg = resolve("kobayashi", None, None, None, None, [], {"inside": None, "budget": None})
        assert cfg["experiments"]["kobayashi"]["inside"] == "ball:1"
        assert "budget" not in cfg["experiments"]["kobayashi"]

    @pytest.mark.parametrize("flags", [
        {"deltas": "0.1,abc"},
        {"deltas": " , "},
        {"point": "0;x"},
        {"budget": "many"},
        {"budget": "0"},
        {"inside": "  "},
    ])
    def test_bad_flag_values(self, flags):
        """Malformed flag values are ConfigErrors"""
        with pytest.raises(ConfigError):
            resolve("kobayashi", None, None, None, None, [], flags)


class TestCommands:
    """Test the typer application"""

    def test_list(self):
        """list shows every experiment"""
        result = runner.invoke(app, ["list"])
        assert result.exit_code == 0
        assert "divergence" in result.output
        assert "tcg-test" in result.output

    def test_divergence_report(self, tmp_path):
        """divergence writes report JSON and CSV"""
        out = tmp_path / "div" / "report.json"
        result = runner.invoke(app, ["divergence", "--out", str(out), "--csv", "--quiet",
                                     "--set", "near_list=[0.01, 0.001]"])
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert report["name"] == "divergence"
        assert len(report["rows"]) == 2
        assert report["report_hash"]
        assert out.with_suffix(".csv").exists()

    def test_experiment_config_file(self, tmp_path):
        """--config is merged over config.yaml"""
        cfg = tmp_path / "exp.yaml"
        cfg.write_text("experiments:\n  divergence:\n    kind: loglinear\n    C: 2.0\n    chi_far: 0.5\n")
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["divergence", "-c", str(cfg), "-o", str(out), "-q"])
        assert result.exit_code == 0
        assert json.loads(out.read_text())["metadata"]["gauge"]["kind"] == "loglinear"

    def test_bad_config_exit_code(self, tmp_path):
        """A missing config file exits with 3"""
        result = runner.invoke(app, ["cz", "--config", str(tmp_path / "absent.yaml")])
        assert result.exit_code == 3

    def test_small_grid_exit_code(self, tmp_path):
        """N below the experiment minimum exits with 3"""
        result = runner.invoke(app, ["tcg-test", "--grid", "16", "-o", str(tmp_path / "r.json")])
        assert result.exit_code == 3

    def test_cz_delta_list(self, tmp_path):
        """cz --delta-list sets the swept deltas"""
        out = tmp_path / "cz.json"
        result = runner.invoke(app, ["cz", "--delta-list", "1e-1,1e-2", "--grid", "32", "-o", str(out), "-q"])
        assert result.exit_code == 0
        rows = json.loads(out.read_text())["rows"]
        assert [r[0] for r in rows] == [0.1, 0.01]

    def test_kobayashi_flags(self, tmp_path):
        """kobayashi takes --inside, --point, --vector and --budget"""
        out = tmp_path / "kob.json"
        result = runner.invoke(app, ["kobayashi", "--inside", "ball:2", "--point", "0,0", "--vector", "1,0",
                                     "--budget", "4", "-o", str(out), "-q"])
        assert result.exit_code == 0
        rows = json.loads(out.read_text())["rows"]
        assert len(rows) == 1
        assert rows[0][2] <= 4

    @pytest.mark.parametrize("args", [
        ["cz", "--delta-list", "1e-1,oops"],
        ["kobayashi", "--budget", "lots"],
        ["kobayashi", "--point", "0,a"],
        ["kobayashi", "--vector", "1,0,0"],
        ["kobayashi", "--inside", "cube:1"],
    ])
    def test_bad_flags_exit_code(self, tmp_path, args):
        """Malformed flag values exit with 3"""
        result = runner.invoke(app, args + ["-o", str(tmp_path / "r.json"), "-q"])
        assert result.exit_code == 3

    def test_hypothesis_exit_code(self, tmp_path):
        """A violated hypothesis exits with 1"""
        result = runner.invoke(app, ["divergence", "-o", str(tmp_path / "r.json"), "-q",
                                     "--set", "kind=loglinear", "--set", "chi_far=2.0"])
        assert result.exit_code == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
