"""
Tests for ConfigManager
"""

import json
import os
from pathlib import Path

import pytest
import yaml

from urlab.config_manager import ConfigManager
from urlab.dyadic import build_christ_cubes
from urlab.exceptions import ConfigError
from urlab.geometry import make_boundary


@pytest.fixture
def yaml_config(temp_dir):
    """Nested YAML config of a Cantor-set run"""
    path = temp_dir / "cantor.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "boundary": {"kind": "four_corner_cantor", "generation": 4},
                "domain": {"side": "complement", "lower": [-0.5, -0.5], "upper": [1.5, 1.5]},
                "grid": {"h_ladder": [0.03125, 0.015625]},
                "functional": {"tags": ["grad_sq_grad_u", "hess_u"]},
            }
        ),
        encoding="utf-8",
    )
    return path


@pytest.mark.unit
class TestConfigManager:
    """Test ConfigManager functionality"""

    def test_defaults(self):
        """Test default configuration values"""
        config = ConfigManager()
        assert config.get("boundary.kind") == "plane"
        assert config.get("experiment.mode") == "green"
        assert config.get("run.threads") == 1
        assert config.get("grid.h_ladder") == [0.03125]
        assert config.get("missing.key", "fallback") == "fallback"

    def test_yaml_file_flattened(self, yaml_config):
        config = ConfigManager(yaml_config)
        assert config.get("boundary.kind") == "four_corner_cantor"
        assert config.get("boundary.generation") == 4
        assert config.get("domain.side") == "complement"

    def test_flat_text_file(self, temp_dir):
        path = temp_dir / "run.cfg"
        path.write_text(
            "# comment\n\ngrid.h_ladder = [0.0625, 0.03125]\noutput.svg = true\noperator.profile = log_oscillating\n",
            encoding="utf-8",
        )
        config = ConfigManager(path)
        assert config.get("grid.h_ladder") == [0.0625, 0.03125]
        assert config.get("output.svg") is True
        assert config.get("operator.profile") == "log_oscillating"

    def test_cli_args_priority(self, yaml_config):
        """CLI arguments beat environment, file and defaults"""
        config = ConfigManager(yaml_config)
        os.environ["URLAB_GRID__H_LADDER"] = "[0.25]"
        config.set_cli_args({"grid.h_ladder": [0.125], "run.seed": None})

        assert config.get("grid.h_ladder") == [0.125]
        assert config.get("run.seed") == 0

    def test_env_vars_priority(self, yaml_config):
        """Environment beats the config file; values are parsed as JSON when possible"""
        config = ConfigManager(yaml_config)
        os.environ["URLAB_GRID__H_LADDER"] = "[0.25]"
        os.environ["URLAB_BOUNDARY__KIND"] = "circle"

        assert config.get("grid.h_ladder") == [0.25]
        assert config.get("boundary.kind") == "circle"

    def test_set_at_file_priority(self):
        config = ConfigManager()
        config.set("run.threads", 4)
        assert config.get("run.threads") == 4
        os.environ["URLAB_RUN__THREADS"] = "2"
        assert config.get("run.threads") == 2

    def test_get_all(self, yaml_config):
        config = ConfigManager(yaml_config)
        os.environ["URLAB_RUN__SEED"] = "11"
        config.set_cli_args({"output.quiet": True})

        values = config.get_all()
        assert values["boundary.generation"] == 4
        assert values["run.seed"] == 11
        assert values["output.quiet"] is True
        assert values["output.format"] == "markdown"

    def test_build_experiment(self, yaml_config):
        experiment = ConfigManager(yaml_config).build_experiment()
        assert experiment.boundary_kind == "four_corner_cantor"
        assert experiment.boundary_params == {"generation": 4}
        assert experiment.h_ladder == [0.03125, 0.015625]
        assert experiment.tags == ["grad_sq_grad_u", "hess_u"]

    def test_validate(self, yaml_config):
        config = ConfigManager(yaml_config)
        assert config.validate() == []
        config.set("functional.epsilon", -1.0)
        assert config.validate()

    def test_validate_unknown_key(self):
        config = ConfigManager()
        config.set("grid.spacing", 0.1)
        problems = config.validate()
        assert len(problems) == 1
        assert "grid.spacing" in problems[0]

    def test_section_views(self, yaml_config):
        config = ConfigManager(yaml_config)
        assert config.get_boundary_config() == {"kind": "four_corner_cantor", "params": {"generation": 4}}
        assert config.get_grid_config()["side"] == "complement"
        assert config.get_operator_config()["axis"] == -1
        assert config.get_functional_config()["scales"] is None

    def test_export_yaml_round_trip(self, yaml_config, temp_dir):
        config = ConfigManager(yaml_config)
        path = temp_dir / "export.yaml"
        config.export_config(path)

        assert ConfigManager(path).get_all() == config.get_all()

    def test_export_json(self, temp_dir):
        path = temp_dir / "export.json"
        ConfigManager().export_config(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["boundary.kind"] == "plane"


@pytest.mark.unit
class TestConfigErrors:
    """Malformed config files"""

    def test_missing_file(self, temp_dir):
        with pytest.raises(ConfigError):
            ConfigManager(temp_dir / "absent.yaml").get_all()

    def test_deep_nesting(self, temp_dir):
        path = temp_dir / "deep.yaml"
        path.write_text("boundary:\n  params:\n    R: 1.0\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            ConfigManager(path).get_all()
        assert exc_info.value.context["config_key"] == "boundary.params"

    def test_invalid_yaml(self, temp_dir):
        path = temp_dir / "broken.yaml"
        path.write_text("grid: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(path).get_all()

    def test_yaml_must_be_mapping(self, temp_dir):
        path = temp_dir / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(path).get_all()

    def test_flat_line_without_equals(self):
        with pytest.raises(ConfigError):
            ConfigManager.parse_flat_text("grid.h_ladder 0.1\n")

    def test_flat_value_not_mapping(self):
        with pytest.raises(ConfigError):
            ConfigManager.parse_flat_text("grid.h_ladder = {a: 1}\n")


@pytest.mark.unit
class TestShippedConfigs:
    """Configs under configs/ resolve to valid experiments"""

    CONFIG_DIR = Path(__file__).parent.parent / "configs"

    @pytest.mark.parametrize("name", ["halfplane.yaml", "lipschitz.yaml", "cantor.yaml"])
    def test_builds(self, name):
        experiment = ConfigManager(self.CONFIG_DIR / name).build_experiment()
        assert len(experiment.h_ladder) == 3
        assert experiment.pole is not None

    @pytest.mark.integration
    @pytest.mark.parametrize("name", ["halfplane.yaml", "lipschitz.yaml", "cantor.yaml"])
    def test_dyadic_range_is_resolved(self, name):
        """The bwgl forest of every shipped config can be built from its sample"""
        experiment = ConfigManager(self.CONFIG_DIR / name).build_experiment()
        params = {**experiment.boundary_params, "ahlfors_trials": 4}
        sample = make_boundary(experiment.boundary_kind, params)
        forest = build_christ_cubes(sample, experiment.k_min, experiment.k_max)
        assert forest.generation(experiment.k_max)
