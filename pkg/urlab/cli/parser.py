"""
Argument parser for urlab CLI

Handles command-line argument parsing and validation.
"""

import argparse

from ..constants import SUPPORTED_REPORT_FORMATS
from .executor import VERBS


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser"""
    parser = argparse.ArgumentParser(
        prog="urlab",
        description="urlab - numerical laboratory for elliptic measure on rough boundaries",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Sample the boundary and record its Ahlfors and corkscrew constants
  urlab gen-boundary --config halfplane.yaml

  # Green function on a refinement ladder
  urlab solve --config halfplane.yaml --h 0.015625 --h 0.0078125

  # Carleson functionals with four worker threads
  urlab functional --config cantor.yaml --threads 4

  # Bounded-versus-divergent verdict next to the BWGL packing
  urlab dichotomy --config cantor.yaml --out runs

  # Render an existing bundle as JSON
  urlab report --config cantor.yaml --format json
        """,
    )

    parser.add_argument("verb", choices=VERBS, help="Experiment stage to run")

    # Configuration
    config_group = parser.add_argument_group("Configuration")
    config_group.add_argument(
        "--config", type=str, help="Config file (YAML, or flat `section.key = value` text)"
    )
    config_group.add_argument(
        "--h",
        type=float,
        action="append",
        dest="h",
        metavar="SPACING",
        help="Grid spacing; repeat to build a refinement ladder (overrides grid.h_ladder)",
    )
    config_group.add_argument("--threads", type=int, help="Worker threads for per-ball sums")
    config_group.add_argument("--seed", type=int, help="Seed for probe subsampling")

    # Output options
    output_group = parser.add_argument_group("Output Options")
    output_group.add_argument("--out", type=str, help="Root directory for bundles (default: urlab_runs)")
    output_group.add_argument(
        "--format",
        choices=SUPPORTED_REPORT_FORMATS,
        help="Report format for the report verb (default: markdown)",
    )
    output_group.add_argument("--svg", action="store_true", default=None, help="Render SVG slices of fields")

    # Output control
    output_control_group = parser.add_argument_group("Output Control")
    output_control_group.add_argument(
        "--verbose", "-v", action="store_true", default=None, help="Enable verbose output"
    )
    output_control_group.add_argument(
        "--quiet", "-q", action="store_true", default=None, help="Suppress all output except errors"
    )

    return parser


def parse_arguments(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = create_parser()
    return parser.parse_args(argv)
