"""
Command handlers for urlab CLI

Contains functions that handle different CLI commands.
"""

import time
import traceback
from pathlib import Path

from ..config_manager import ConfigManager
from ..constants import EXIT_NUMERICAL, EXIT_SUCCESS
from ..exceptions import LabError
from ..io import StreamHandler
from ..storage_manager import StorageManager
from ..validation import InputValidator
from .executor import ExperimentExecutor
from .utils import cli_overrides, format_duration


def build_config_manager(args) -> ConfigManager:
    """
    Validate the raw flags and layer them over the config file

    Raises:
        ValidationError: On a bad config path, spacing or thread count
    """
    if args.config:
        InputValidator.validate_config_file(Path(args.config))
    for h in args.h or []:
        InputValidator.validate_spacing(h)
    if args.threads is not None:
        InputValidator.validate_threads(args.threads)
    if args.out:
        InputValidator.validate_output_dir(Path(args.out))

    config = ConfigManager(args.config)
    config.set_cli_args(cli_overrides(args))
    return config


def run_experiment_command(args) -> int:
    """
    Handle one experiment verb

    Args:
        args: Parsed command-line arguments

    Returns:
        Exit code (0 on success, 2 on validation errors, 3 on numerical failures)
    """
    stream = StreamHandler(verbose=bool(args.verbose), quiet=bool(args.quiet))

    try:
        manager = build_config_manager(args)
        config = manager.build_experiment()
    except LabError as e:
        stream.write(str(e), "error")
        return e.exit_code

    storage = StorageManager(config.output_dir)
    executor = ExperimentExecutor(config, storage, stream)
    stream.write(f"urlab {args.verb} (config {executor.config_hash})", "info")

    start = time.perf_counter()
    try:
        bundle = executor.run(args.verb)
    except LabError as e:
        stream.write(str(e), "error")
        stream.write(f"Log: {executor.logger.get_log_file_path()}", "info")
        return e.exit_code
    except Exception as e:
        stream.write(f"Unexpected failure: {e}", "error")
        stream.write(traceback.format_exc(), "debug")
        return EXIT_NUMERICAL

    stream.write(f"Completed in {format_duration(time.perf_counter() - start)}", "info")
    stream.write(f"Bundle: {bundle}", "info")
    return EXIT_SUCCESS
