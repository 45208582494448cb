"""
Tests for CLI command handlers
"""

import json

import pytest

from urlab.cli.commands import build_config_manager, run_experiment_command
from urlab.cli.parser import parse_arguments
from urlab.constants import EXIT_SUCCESS, EXIT_VALIDATION
from urlab.exceptions import ConfigError, ParameterError


@pytest.fixture
def config_file(temp_dir, flat_config):
    """Flat `key = value` config of the small half-plane run"""
    path = temp_dir / "halfplane.cfg"
    lines = ["# half-plane Green function"]
    lines += [f"{key} = {json.dumps(value)}" for key, value in flat_config.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.mark.unit
class TestBuildConfigManager:
    """Flag validation and layering"""

    def test_flags_override_file(self, config_file, temp_dir):
        args = parse_arguments(["solve", "--config", str(config_file), "--h", "0.125", "--out", str(temp_dir)])
        config = build_config_manager(args).build_experiment()

        assert config.h_ladder == [0.125]
        assert config.output_dir == str(temp_dir)
        assert config.pole == [0.0, 0.5]

    def test_missing_config_file(self, temp_dir):
        args = parse_arguments(["solve", "--config", str(temp_dir / "absent.yaml")])
        with pytest.raises(ConfigError):
            build_config_manager(args)

    @pytest.mark.parametrize("h", ["0", "1.5", "-0.1"])
    def test_bad_spacing(self, h):
        with pytest.raises(ParameterError):
            build_config_manager(parse_arguments(["solve", f"--h={h}"]))

    def test_bad_threads(self):
        with pytest.raises(ParameterError):
            build_config_manager(parse_arguments(["solve", "--threads", "0"]))

    def test_output_path_is_file(self, config_file):
        args = parse_arguments(["solve", "--config", str(config_file), "--out", str(config_file)])
        with pytest.raises(ConfigError) as exc_info:
            build_config_manager(args)
        assert exc_info.value.context["config_key"] == "output.dir"


@pytest.mark.integration
class TestRunExperimentCommand:
    """Exit codes of whole runs"""

    def test_solve_succeeds(self, config_file, temp_dir):
        out = temp_dir / "runs"
        args = parse_arguments(["solve", "--config", str(config_file), "--out", str(out), "-q"])

        assert run_experiment_command(args) == EXIT_SUCCESS

        bundles = [p for p in out.iterdir() if (p / "manifest.json").is_file()]
        assert len(bundles) == 1
        manifest = json.loads((bundles[0] / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["status"] == "completed"
        assert manifest["verbs"] == ["solve"]
        assert (bundles[0] / "tables" / "solve.csv").is_file()

    def test_validation_failure_exit_code(self, temp_dir):
        args = parse_arguments(["solve", "--config", str(temp_dir / "absent.cfg"), "-q"])
        assert run_experiment_command(args) == EXIT_VALIDATION

    def test_unknown_config_key(self, temp_dir, capsys):
        path = temp_dir / "bad.cfg"
        path.write_text("grid.spacing = 0.1\n", encoding="utf-8")
        args = parse_arguments(["solve", "--config", str(path), "--out", str(temp_dir), "-q"])

        assert run_experiment_command(args) == EXIT_VALIDATION
        assert "grid.spacing" in capsys.readouterr().err

    def test_stage_failure_keeps_cause_exit_code(self, config_file, temp_dir):
        """A one-rung ladder cannot support the dichotomy"""
        args = parse_arguments(
            ["dichotomy", "--config", str(config_file), "--h", "0.0625", "--out", str(temp_dir / "runs"), "-q"]
        )
        assert run_experiment_command(args) == EXIT_VALIDATION
