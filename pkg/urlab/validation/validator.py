"""
Input validation module for urlab

Static checks of command-line inputs before any configuration is
resolved: files, directories, spacings and thread counts.
"""

import math
from pathlib import Path

from ..exceptions import ConfigError, ParameterError

CONFIG_SUFFIXES = (".yaml", ".yml", ".cfg", ".conf", ".ini", ".txt")


class InputValidator:
    """Validates inputs for urlab"""

    @staticmethod
    def validate_config_file(config_file: Path) -> None:
        """
        Validate config file exists and is readable

        Args:
            config_file: Path to config file

        Raises:
            ConfigError: If file is invalid
        """
        if not config_file.exists():
            raise ConfigError(f"Config file not found: {config_file}", config_key="config")

        if not config_file.is_file():
            raise ConfigError(f"Not a file: {config_file}", config_key="config")

        if config_file.suffix.lower() not in CONFIG_SUFFIXES:
            raise ConfigError(
                f"Invalid config file format: {config_file.suffix}. "
                f"Supported: {', '.join(CONFIG_SUFFIXES)}",
                config_key="config",
            )

        try:
            config_file.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"Cannot read config file: {e}", config_key="config") from e

    @staticmethod
    def validate_output_dir(output_dir: Path) -> None:
        """
        Validate the output directory is usable

        Raises:
            ConfigError: If the path exists and is not a directory
        """
        if output_dir.exists() and not output_dir.is_dir():
            raise ConfigError(f"Output path is not a directory: {output_dir}", config_key="output.dir")

    @staticmethod
    def validate_spacing(h: float) -> None:
        """
        Validate a grid spacing given on the command line

        Raises:
            ParameterError: If h is not a finite positive number below 1
        """
        if not math.isfinite(h) or h <= 0 or h >= 1:
            raise ParameterError(f"Invalid grid spacing: {h}. Must lie in (0, 1).", "h", h)

    @staticmethod
    def validate_threads(threads: int) -> None:
        if threads < 1:
            raise ParameterError(f"Invalid thread count: {threads}. Must be at least 1.", "threads", threads)
