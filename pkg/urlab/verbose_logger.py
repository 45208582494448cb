"""
Experiment Logger for urlab

Dual output (console + bundle log file) with structured records of the
stages and solves performed during one run.
"""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any

from .storage_manager import StorageManager


class ExperimentLogger:
    """Logger with console and file outputs plus a stage ledger"""

    def __init__(
        self,
        storage_manager: StorageManager | None = None,
        config_hash: str = "session",
        console_enabled: bool = True,
        file_enabled: bool = True,
        log_level: str = "INFO",
    ):
        """
        Initialize ExperimentLogger

        Args:
            storage_manager: StorageManager instance for file paths
            config_hash: Bundle the log file belongs to
            console_enabled: Whether to log to console
            file_enabled: Whether to log to file
            log_level: Minimum console level (DEBUG, INFO, WARNING, ERROR)
        """
        self.storage = storage_manager or StorageManager()
        self.config_hash = config_hash
        self.console_enabled = console_enabled
        self.file_enabled = file_enabled
        self.log_level = getattr(logging, log_level.upper(), logging.INFO)

        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file = self.storage.get_logs_dir(config_hash) / f"urlab_{self.session_id}.log"

        self._setup_logger()

        self.stages: list[dict[str, Any]] = []
        self.solves: list[dict[str, Any]] = []
        self.errors: list[dict[str, Any]] = []

    def _setup_logger(self) -> None:
        """Attach handlers to the package logger so library modules share them"""
        self.logger = logging.getLogger("urlab")
        self.logger.setLevel(logging.DEBUG)
        self.close()

        console_formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(message)s", datefmt="%H:%M:%S")
        file_formatter = logging.Formatter(
            "%(asctime)s [%(levelname)s] [%(name)s] %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

        if self.console_enabled:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(self.log_level)
            console_handler.setFormatter(console_formatter)
            self.logger.addHandler(console_handler)

        if self.file_enabled:
            file_handler = logging.FileHandler(self.log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(file_formatter)
            self.logger.addHandler(file_handler)

    def close(self) -> None:
        """Detach and close all handlers"""
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)

    def log_run_start(self, verb: str, config: dict[str, Any]) -> None:
        self.logger.info(f"Starting {verb} [{self.config_hash}]")
        self.logger.debug(f"Configuration: {json.dumps(config, indent=2, sort_keys=True, default=str)}")

    def log_stage(
        self,
        stage: str,
        description: str,
        details: dict[str, Any] | None = None,
        level: str = "INFO",
    ) -> None:
        """
        Log a pipeline stage

        Args:
            stage: Stage name (e.g. "boundary", "solve", "functional")
            description: Human-readable description
            details: Additional structured data
            level: Log level
        """
        self.stages.append(
            {
                "timestamp": datetime.now().isoformat(),
                "stage": stage,
                "description": description,
                "details": details or {},
            }
        )
        log_method = getattr(self.logger, level.lower(), self.logger.info)
        log_method(f"[{stage.upper()}] {description}")
        if details and self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(f"Details: {json.dumps(details, indent=2, default=str)}")

    def log_solve(self, label: str, report: dict[str, Any], duration_s: float | None = None) -> None:
        """Record one linear solve by its SolveReport dictionary"""
        record = {"label": label, "duration_s": duration_s, **report}
        self.solves.append(record)
        msg = (
            f"Solve {label}: {report.get('iterations')} iterations, "
            f"residual {report.get('residual', float('nan')):.3e}"
        )
        if duration_s is not None:
            msg += f" [{duration_s:.2f}s]"
        self.logger.info(msg)

    def log_error(
        self,
        error_type: str,
        message: str,
        details: dict[str, Any] | None = None,
        recoverable: bool = True,
    ) -> None:
        """Log an error; recoverable ones are warnings"""
        self.errors.append(
            {
                "timestamp": datetime.now().isoformat(),
                "type": error_type,
                "message": message,
                "details": details or {},
                "recoverable": recoverable,
            }
        )
        log_method = self.logger.warning if recoverable else self.logger.error
        log_method(f"[{error_type}] {message}")
        if details:
            self.logger.debug(f"Error details: {json.dumps(details, indent=2, default=str)}")

    def log_run_complete(self, success: bool, duration: float) -> None:
        status = "COMPLETED" if success else "FAILED"
        self.logger.info(f"Run {status} in {duration:.2f} seconds")
        if self.file_enabled:
            self._write_summary()

    def get_log_file_path(self) -> Path:
        return self.log_file

    def get_summary(self) -> dict[str, Any]:
        """Structured summary of the run"""
        return {
            "session_id": self.session_id,
            "config_hash": self.config_hash,
            "log_file": str(self.log_file),
            "stages": len(self.stages),
            "solves": self.solves,
            "errors": self.errors,
            "recent_stages": self.stages[-10:],
        }

    def _write_summary(self) -> None:
        for handler in self.logger.handlers:
            handler.flush()
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write("\n" + "=" * 80 + "\n")
            f.write("RUN SUMMARY\n")
            f.write("=" * 80 + "\n")
            f.write(json.dumps(self.get_summary(), indent=2, default=str))
            f.write("\n")
