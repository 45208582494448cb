"""
IO handlers for urlab

Output formatting, user-facing streams and file codecs.
"""

from .codecs import read_boundary, read_field, read_probes, write_boundary, write_field, write_probes
from .output_handler import OutputHandler
from .stream_handler import StreamHandler

__all__ = [
    "OutputHandler",
    "StreamHandler",
    "read_boundary",
    "read_field",
    "read_probes",
    "write_boundary",
    "write_field",
    "write_probes",
]
