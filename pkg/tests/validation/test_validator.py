"""
Tests for command-line input validation
"""

import pytest

from urlab.exceptions import ConfigError, ParameterError
from urlab.validation import InputValidator


@pytest.mark.unit
class TestInputValidator:
    """Static checks before configuration is resolved"""

    def test_config_file_ok(self, temp_dir):
        path = temp_dir / "run.yaml"
        path.write_text("grid:\n  h_ladder: [0.0625]\n", encoding="utf-8")
        InputValidator.validate_config_file(path)

    def test_config_file_missing(self, temp_dir):
        with pytest.raises(ConfigError, match="not found"):
            InputValidator.validate_config_file(temp_dir / "absent.yaml")

    def test_config_file_is_directory(self, temp_dir):
        with pytest.raises(ConfigError, match="Not a file"):
            InputValidator.validate_config_file(temp_dir)

    def test_config_file_suffix(self, temp_dir):
        path = temp_dir / "run.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(ConfigError, match="Invalid config file format"):
            InputValidator.validate_config_file(path)

    def test_config_file_not_text(self, temp_dir):
        path = temp_dir / "run.cfg"
        path.write_bytes(b"\xff\xfe\x00binary")
        with pytest.raises(ConfigError, match="Cannot read"):
            InputValidator.validate_config_file(path)

    def test_output_dir(self, temp_dir):
        InputValidator.validate_output_dir(temp_dir)
        InputValidator.validate_output_dir(temp_dir / "new")
        path = temp_dir / "file.txt"
        path.write_text("x", encoding="utf-8")
        with pytest.raises(ConfigError):
            InputValidator.validate_output_dir(path)

    @pytest.mark.parametrize("h", [0.5, 1 / 128])
    def test_spacing_ok(self, h):
        InputValidator.validate_spacing(h)

    @pytest.mark.parametrize("h", [0.0, -0.1, 1.0, float("nan"), float("inf")])
    def test_spacing_rejected(self, h):
        with pytest.raises(ParameterError) as exc_info:
            InputValidator.validate_spacing(h)
        assert exc_info.value.context["parameter"] == "h"

    def test_threads(self):
        InputValidator.validate_threads(1)
        with pytest.raises(ParameterError):
            InputValidator.validate_threads(0)
