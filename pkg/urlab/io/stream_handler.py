"""
Stream handler for urlab

User-facing progress lines during a run.
"""

import sys


class StreamHandler:
    """Prints [INFO]/[WARN]/[ERROR] lines filtered by verbosity"""

    PREFIXES = {
        "debug": "[DEBUG]",
        "info": "[INFO]",
        "warning": "[WARN]",
        "error": "[ERROR]",
    }

    def __init__(self, verbose: bool = False, quiet: bool = False):
        """
        Initialize StreamHandler

        Args:
            verbose: Also show debug lines
            quiet: Suppress all output except errors
        """
        self.verbose = verbose
        self.quiet = quiet

    def write(self, message: str, level: str = "info") -> None:
        """
        Write a message if its level is visible

        Args:
            message: Message to write
            level: debug, info, warning or error
        """
        if level == "error":
            should_display = True
        elif self.quiet:
            should_display = False
        elif level == "debug":
            should_display = self.verbose
        else:
            should_display = level in ("info", "warning")

        if should_display:
            prefix = self.PREFIXES.get(level, "")
            stream = sys.stderr if level == "error" else sys.stdout
            print(f"{prefix} {message}" if prefix else message, file=stream)

