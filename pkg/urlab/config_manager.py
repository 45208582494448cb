"""
Configuration Manager for urlab

Manages experiment configuration with priority order:
1. Command-line arguments (highest priority)
2. Environment variables (URLAB_SECTION__KEY)
3. Config file (YAML, or flat `section.key = value` text)
4. Defaults (lowest priority)

All keys are dotted `section.key` names; config files may also nest one
level deep (`section: {key: value}`), which is flattened on load.
"""

import json
import os
from pathlib import Path
from typing import Any

import yaml

from .exceptions import ConfigError
from .models.experiment import ExperimentConfig

YAML_SUFFIXES = (".yaml", ".yml")


class ConfigManager:
    """Manages configuration with layered priority system"""

    # Environment variable prefix
    ENV_PREFIX = "URLAB_"

    # Default configuration values: a half-plane Green-function run
    DEFAULTS: dict[str, Any] = {
        # Boundary
        "boundary.kind": "plane",
        # Domain box
        "domain.side": "one_side",
        "domain.lower": [-2.0, 0.0],
        "domain.upper": [2.0, 2.0],
        # Operator
        "operator.beta": 1.0,
        "operator.profile": "identity",
        # Grid and solver
        "grid.h_ladder": [0.03125],
        "grid.tolerance": 1e-9,
        "grid.max_iterations": 20_000,
        # Experiment
        "experiment.mode": "green",
        # Functionals
        "functional.tags": ["grad_sq_grad_u"],
        "functional.epsilon": 0.1,
        # Christ cubes
        "dyadic.k_min": 0,
        "dyadic.k_max": 4,
        # Output
        "output.dir": "urlab_runs",
        "output.svg": False,
        "output.format": "markdown",
        "output.verbose": False,
        "output.quiet": False,
        # Run
        "run.seed": 0,
        "run.threads": 1,
    }

    def __init__(self, config_path: Path | str | None = None):
        """
        Initialize ConfigManager

        Args:
            config_path: Optional config file; YAML when the suffix is
                .yaml/.yml, flat `key = value` text otherwise
        """
        self.config_path = Path(config_path) if config_path is not None else None
        self.cli_args: dict[str, Any] = {}
        self._config_cache: dict[str, Any] | None = None

    def set_cli_args(self, args: dict[str, Any]) -> None:
        """
        Set command-line arguments (highest priority)

        Args:
            args: Dotted keys to values; None values are ignored
        """
        self.cli_args = {k: v for k, v in args.items() if v is not None}

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value with priority handling

        Args:
            key: Dotted configuration key
            default: Default value if not found anywhere

        Returns:
            Configuration value
        """
        if key in self.cli_args:
            return self.cli_args[key]

        env_value = os.environ.get(self._env_key(key))
        if env_value is not None:
            return self._parse_env_value(env_value)

        file_values = self._file_values()
        if key in file_values:
            return file_values[key]

        if key in self.DEFAULTS:
            return self.DEFAULTS[key]

        return default

    def set(self, key: str, value: Any) -> None:
        """Set a value at config-file priority for this session"""
        self._file_values()[key] = value

    def get_all(self) -> dict[str, Any]:
        """
        Get all configuration values with priorities applied

        Returns:
            Flat dictionary of dotted keys
        """
        config = dict(self.DEFAULTS)
        file_values = self._file_values()
        config.update(file_values)

        for key in set(self.DEFAULTS) | set(file_values) | set(self.cli_args):
            env_value = os.environ.get(self._env_key(key))
            if env_value is not None:
                config[key] = self._parse_env_value(env_value)

        config.update(self.cli_args)
        return config

    def build_experiment(self) -> ExperimentConfig:
        """
        Resolve every layer into a validated ExperimentConfig

        Raises:
            ConfigError: If the resolved configuration is invalid
        """
        return ExperimentConfig.from_flat(self.get_all())

    def validate(self) -> list[str]:
        """
        Validate configuration settings

        Returns:
            List of validation errors (empty if valid)
        """
        try:
            config = ExperimentConfig.from_flat(self.get_all(), validate=False)
        except ConfigError as e:
            return [e.message]
        return [message for _, message in config.problems()]

    def export_config(self, path: Path) -> None:
        """
        Export current configuration to file

        Args:
            path: Path to export file (YAML or JSON by suffix)
        """
        config = self.get_all()
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            if path.suffix in YAML_SUFFIXES:
                yaml.safe_dump(self._nest(config), f, default_flow_style=False, sort_keys=True)
            else:
                json.dump(config, f, indent=2, sort_keys=True)
                f.write("\n")

    def get_boundary_config(self) -> dict[str, Any]:
        """Boundary kind and generator parameters"""
        config = self.get_all()
        return {
            "kind": config.get("boundary.kind"),
            "params": {
                key.partition(".")[2]: value
                for key, value in config.items()
                if key.startswith("boundary.") and key != "boundary.kind"
            },
        }

    def get_operator_config(self) -> dict[str, Any]:
        return {
            "beta": self.get("operator.beta"),
            "profile": self.get("operator.profile"),
            "axis": self.get("operator.axis", -1),
            "offset": self.get("operator.offset", 0.0),
        }

    def get_grid_config(self) -> dict[str, Any]:
        return {
            "lower": self.get("domain.lower"),
            "upper": self.get("domain.upper"),
            "side": self.get("domain.side"),
            "h_ladder": self.get("grid.h_ladder"),
            "tolerance": self.get("grid.tolerance"),
            "max_iterations": self.get("grid.max_iterations"),
        }

    def get_functional_config(self) -> dict[str, Any]:
        return {
            "tags": self.get("functional.tags"),
            "scales": self.get("functional.scales"),
            "epsilon": self.get("functional.epsilon"),
        }

    def _env_key(self, key: str) -> str:
        return f"{self.ENV_PREFIX}{key.upper().replace('.', '__')}"

    def _file_values(self) -> dict[str, Any]:
        if self._config_cache is None:
            self._config_cache = self._load_config_file() if self.config_path else {}
        return self._config_cache

    def _load_config_file(self) -> dict[str, Any]:
        """Load and flatten the config file"""
        assert self.config_path is not None
        if not self.config_path.is_file():
            raise ConfigError(f"Config file not found: {self.config_path}", config_key="config")
        text = self.config_path.read_text(encoding="utf-8")
        if self.config_path.suffix in YAML_SUFFIXES:
            try:
                data = yaml.safe_load(text) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"Invalid YAML in {self.config_path}: {e}", config_key="config") from e
            if not isinstance(data, dict):
                raise ConfigError("Config file must hold a mapping", config_key="config")
            return self.flatten(data)
        return self.parse_flat_text(text)

    @staticmethod
    def flatten(data: dict[str, Any]) -> dict[str, Any]:
        """
        Flatten one level of nesting into dotted keys

        Raises:
            ConfigError: On nesting deeper than one level
        """
        flat: dict[str, Any] = {}
        for key, value in data.items():
            if isinstance(value, dict):
                for inner_key, inner_value in value.items():
                    dotted = f"{key}.{inner_key}"
                    if isinstance(inner_value, dict):
                        raise ConfigError(
                            f"Nesting deeper than one level at {dotted}",
                            config_key=dotted,
                            suggestion="Use dotted section.key names",
                        )
                    flat[dotted] = inner_value
            else:
                flat[str(key)] = value
        return flat

    @staticmethod
    def parse_flat_text(text: str) -> dict[str, Any]:
        """
        Parse `key = value` lines; values are read as YAML scalars or lists

        Blank lines and lines starting with `#` are skipped.
        """
        flat: dict[str, Any] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"Line {number} is not `key = value`: {raw}", config_key="config")
            try:
                parsed = yaml.safe_load(value.strip()) if value.strip() else None
            except yaml.YAMLError as e:
                raise ConfigError(f"Cannot parse value on line {number}: {value}", config_key=key.strip()) from e
            if isinstance(parsed, dict):
                raise ConfigError(f"Nesting deeper than one level at {key.strip()}", config_key=key.strip())
            flat[key.strip()] = parsed
        return flat

    @staticmethod
    def _nest(flat: dict[str, Any]) -> dict[str, Any]:
        nested: dict[str, Any] = {}
        for key, value in flat.items():
            section, _, name = key.partition(".")
            nested.setdefault(section, {})[name] = value
        return nested

    def _parse_env_value(self, value: str) -> Any:
        """
        Parse environment variable value to appropriate type

        Args:
            value: String value from environment

        Returns:
            Parsed value
        """
        try:
            return json.loads(value)
        except json.JSONDecodeError:
            return value
