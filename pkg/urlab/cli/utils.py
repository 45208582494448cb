"""
Utility functions for CLI operations

Contains helper functions used across CLI modules.
"""

import argparse
from typing import Any

# Parsed flag name -> dotted config key
FLAG_KEYS = {
    "h": "grid.h_ladder",
    "threads": "run.threads",
    "seed": "run.seed",
    "out": "output.dir",
    "format": "output.format",
    "svg": "output.svg",
    "verbose": "output.verbose",
    "quiet": "output.quiet",
}


def cli_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """
    Map parsed flags onto dotted config keys

    Flags left unset are omitted so lower-priority layers still apply.
    """
    values = vars(args)
    return {key: values[flag] for flag, key in FLAG_KEYS.items() if values.get(flag) is not None}


def format_duration(seconds: float) -> str:
    """
    Format duration in seconds to human-readable string

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted duration string
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = seconds % 60
        return f"{minutes}m {secs:.1f}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        return f"{hours}h {minutes}m"
