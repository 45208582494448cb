"""
Tests for OutputHandler
"""

import json

import numpy as np
import pytest
import yaml

from urlab.elliptic import GridField
from urlab.exceptions import ParameterError
from urlab.io.output_handler import OutputHandler


@pytest.mark.unit
class TestOutputHandler:
    """Test OutputHandler functionality"""

    @pytest.fixture
    def sample_summary(self):
        """Summary as the executor builds it, numpy values included"""
        return {
            "verb": "functional",
            "config_hash": "abc123",
            "status": "ok",
            "versions": {"urlab": "0.1.0", "numpy": "1.26.4"},
            "constants": {"C_beta": np.float64(3.14159), "tested": np.int64(12)},
            "trends": ["bounded", "diverging"],
            "sup": 0.125,
        }

    def test_format_json(self, sample_summary):
        """Test JSON output converts numpy scalars"""
        parsed = json.loads(OutputHandler.format_output(sample_summary, "json"))
        assert parsed["constants"] == {"C_beta": 3.14159, "tested": 12}
        assert parsed["trends"] == ["bounded", "diverging"]

    def test_format_json_sorted(self, sample_summary):
        """Test JSON keys come out sorted so reports are reproducible"""
        result = OutputHandler.format_output(sample_summary, "json")
        assert result == OutputHandler.format_output(dict(reversed(sample_summary.items())), "json")

    def test_format_yaml(self, sample_summary):
        parsed = yaml.safe_load(OutputHandler.format_output(sample_summary, "yaml"))
        assert parsed["constants"]["tested"] == 12
        assert parsed["status"] == "ok"

    def test_format_markdown(self, sample_summary):
        result = OutputHandler.format_output(sample_summary, "markdown")
        assert result.startswith("# urlab functional report")
        assert "- **Config hash:** abc123" in result
        assert "## Constants" in result
        assert "| C_beta | 3.14159 |" in result
        assert "- bounded" in result

    def test_unsupported_format(self, sample_summary):
        with pytest.raises(ParameterError) as exc_info:
            OutputHandler.format_output(sample_summary, "xml")
        assert "json" in exc_info.value.suggestion

    def test_write_output_to_file(self, temp_dir):
        path = temp_dir / "nested" / "report.md"
        OutputHandler.write_output("# report", path)
        assert path.read_text() == "# report\n"

    def test_write_output_to_stdout(self, capsys):
        OutputHandler.write_output("hello")
        assert capsys.readouterr().out == "hello\n"

    def test_write_csv_cells(self, temp_dir):
        """Test fixed float format, nan for missing values and 0/1 for bools"""
        path = OutputHandler.write_csv(
            temp_dir / "t.csv", ["h", "sup", "ok", "n"], [[0.5, None, True, 3], [0.25, float("nan"), False, np.int64(4)]]
        )
        assert path.read_bytes() == (
            b"h,sup,ok,n\n" b"5.000000000000e-01,nan,1,3\n" b"2.500000000000e-01,nan,0,4\n"
        )


@pytest.mark.unit
class TestRenderSlice:
    """SVG rendering of lattice fields"""

    @pytest.fixture
    def field_(self, line_domain):
        template = GridField.template(line_domain, 1 / 8)
        return template.with_values(template.sample_function(lambda X: X[:, 1]), integrand="t")

    def test_svg_is_reproducible(self, field_, temp_dir):
        first = OutputHandler.render_slice(field_, temp_dir / "a.svg").read_bytes()
        second = OutputHandler.render_slice(field_, temp_dir / "b.svg").read_bytes()
        assert first == second
        assert b"<svg" in first

    def test_vector_field_rejected(self, field_, temp_dir):
        vector = field_.with_values(np.zeros(field_.shape + (2,)), rank="vector")
        with pytest.raises(ParameterError):
            OutputHandler.render_slice(vector, temp_dir / "v.svg")
