"""
CLI package for urlab

This package contains command-line interface functionality split into focused modules.
"""

import sys

from .commands import build_config_manager, run_experiment_command
from .executor import VERBS, ExperimentExecutor, run_experiment
from .parser import create_parser, parse_arguments
from .utils import cli_overrides, format_duration


def main(argv: list[str] | None = None) -> None:
    """Main CLI entry point"""
    args = parse_arguments(argv)
    sys.exit(run_experiment_command(args))


__all__ = [
    "VERBS",
    "ExperimentExecutor",
    "build_config_manager",
    "cli_overrides",
    "create_parser",
    "format_duration",
    "main",
    "parse_arguments",
    "run_experiment",
    "run_experiment_command",
]
