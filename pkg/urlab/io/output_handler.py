"""
Output handler for urlab

Formats run summaries (JSON, YAML, markdown), writes byte-reproducible CSV
tables and renders 2-D SVG slices of lattice fields.
"""

import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import yaml  # noqa: E402

from ..constants import CSV_FLOAT_FORMAT, SUPPORTED_REPORT_FORMATS  # noqa: E402
from ..elliptic.grid import GridField  # noqa: E402
from ..exceptions import ParameterError  # noqa: E402
from ..models.serialization import to_builtin  # noqa: E402

SVG_HASH_SALT = "urlab"


class OutputHandler:
    """Formatting and writing of tables, summaries and plots"""

    @staticmethod
    def format_output(results: dict[str, Any], format_type: str = "json") -> str:
        """
        Format a summary dictionary

        Args:
            results: Summary dictionary (numpy values allowed)
            format_type: json, yaml or markdown

        Returns:
            Formatted output string
        """
        if format_type not in SUPPORTED_REPORT_FORMATS:
            raise ParameterError(
                f"Unsupported format: {format_type}",
                "format",
                format_type,
                suggestion=f"Choose one of: {', '.join(SUPPORTED_REPORT_FORMATS)}",
            )
        plain = to_builtin(results)
        formatters = {
            "json": OutputHandler._format_json,
            "yaml": OutputHandler._format_yaml,
            "markdown": OutputHandler._format_markdown,
        }
        return formatters[format_type](plain)

    @staticmethod
    def write_output(content: str, file_path: Path | None = None) -> None:
        """Write formatted output to a file, or stdout when no path is given"""
        if file_path:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            with open(file_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(content)
                if not content.endswith("\n"):
                    f.write("\n")
        else:
            print(content)

    @staticmethod
    def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Write a CSV table with fixed float formatting and `\\n` line endings

        Floats use %.12e, None and NaN become `nan`, bools become 0/1.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(OutputHandler._cell(value) for value in row) + "\n")
        return path

    @staticmethod
    def _cell(value: Any) -> str:
        if value is None:
            return "nan"
        if isinstance(value, bool | np.bool_):
            return str(int(value))
        if isinstance(value, int | np.integer):
            return str(int(value))
        if isinstance(value, float | np.floating):
            return "nan" if np.isnan(value) else CSV_FLOAT_FORMAT % value
        return str(value)

    @staticmethod
    def _format_json(results: dict[str, Any]) -> str:
        return json.dumps(results, indent=2, sort_keys=True, ensure_ascii=False)

    @staticmethod
    def _format_yaml(results: dict[str, Any]) -> str:
        return yaml.safe_dump(results, default_flow_style=False, allow_unicode=True, sort_keys=True)

    @staticmethod
    def _format_markdown(results: dict[str, Any]) -> str:
        """Markdown report: run header, then one section per top-level mapping"""
        title = results.get("verb", "run")
        md = f"# urlab {title} report\n\n"
        md += f"- **Config hash:** {results.get('config_hash', 'unknown')}\n"
        md += f"- **Status:** {results.get('status', 'unknown')}\n"
        versions = results.get("versions", {})
        if versions:
            md += "- **Versions:** " + ", ".join(f"{k} {v}" for k, v in sorted(versions.items())) + "\n"
        md += "\n"

        for key, value in results.items():
            if key in ("verb", "config_hash", "status", "versions"):
                continue
            md += f"## {key.replace('_', ' ').title()}\n\n"
            if isinstance(value, dict):
                md += "| Key | Value |\n|---|---|\n"
                for inner_key, inner_value in value.items():
                    md += f"| {inner_key} | {OutputHandler._markdown_value(inner_value)} |\n"
            elif isinstance(value, list):
                for item in value:
                    md += f"- {OutputHandler._markdown_value(item)}\n"
            else:
                md += f"{OutputHandler._markdown_value(value)}\n"
            md += "\n"
        return md

    @staticmethod
    def _markdown_value(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.6g}"
        if isinstance(value, dict | list):
            return "`" + json.dumps(value, sort_keys=True) + "`"
        return str(value)

    @staticmethod
    def render_slice(
        field_: GridField,
        path: str | Path,
        title: str | None = None,
        fixed: float | None = None,
    ) -> Path:
        """
        Render a scalar field as an SVG image.

        3-D fields are cut at the node plane nearest to `fixed` along the
        last axis (the middle plane by default). Undefined nodes are blank.
        """
        if field_.rank != "scalar":
            raise ParameterError("Only scalar fields can be rendered", "rank", field_.rank)
        if field_.n not in (2, 3):
            raise ParameterError("Slices are available for n = 2 or 3", "n", field_.n)
        values = np.where(field_.defined, field_.values, np.nan)
        lower, h = field_.domain.lower, field_.h
        caption = title or str(field_.metadata.get("integrand", "field"))
        if field_.n == 3:
            level = field_.shape[2] // 2 if fixed is None else int(np.rint((fixed - lower[2]) / h))
            level = min(max(level, 0), field_.shape[2] - 1)
            values = values[:, :, level]
            caption += f" (x3 = {lower[2] + level * h:.4g})"

        x = lower[0] + h * (np.arange(values.shape[0] + 1) - 0.5)
        y = lower[1] + h * (np.arange(values.shape[1] + 1) - 0.5)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=(5.0, 4.0))
            mesh = ax.pcolormesh(x, y, np.ma.masked_invalid(values).T, cmap="viridis", shading="flat")
            fig.colorbar(mesh, ax=ax)
            ax.set_aspect("equal")
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_title(caption)
            fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
            plt.close(fig)
        return path
