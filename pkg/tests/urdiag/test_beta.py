"""
Tests for bilateral beta numbers and BWGL packing
"""

import numpy as np
import pytest

from urlab.dyadic import build_christ_cubes
from urlab.exceptions import DimensionError, FitError, ParameterError
from urlab.geometry import make_boundary
from urlab.urdiag import bwgl_report, fit_bbeta, write_beta_csv


@pytest.fixture(scope="module")
def line_forest(line_sample):
    return build_christ_cubes(line_sample, 1, 3)


@pytest.mark.unit
class TestFitBbeta:
    """Single-cube fits"""

    def test_line_is_flat(self, line_sample):
        fit = fit_bbeta(line_sample, np.array([0.0, 0.0]), 0.25)
        assert fit.value <= 1 / 32 + 1e-6
        assert fit.value <= fit.seed_value
        assert abs(fit.frame[0, 1]) < 1e-6

    def test_circle_is_not_flat(self, circle_sample, line_sample):
        curved = fit_bbeta(circle_sample, np.array([1.0, 0.0]), 0.25).value
        flat = fit_bbeta(line_sample, np.array([0.0, 0.0]), 0.25).value
        assert 0.0 < curved < 1.0
        assert curved > flat

    def test_empty_ball(self, line_sample):
        with pytest.raises(FitError):
            fit_bbeta(line_sample, np.array([0.0, 10.0]), 0.25)

    def test_side_positive(self, line_sample):
        with pytest.raises(ParameterError):
            fit_bbeta(line_sample, np.array([0.0, 0.0]), 0.0)

    def test_fractional_dimension(self):
        points = np.array([[0.0, 0.0, 0.0], [0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.1, 0.1, 0.0]])
        sample = make_boundary("custom", {"points": points, "d": 1.5})
        with pytest.raises(DimensionError):
            fit_bbeta(sample, np.zeros(3), 0.25)


@pytest.mark.integration
class TestBWGL:
    """Packing of cubes with large beta numbers"""

    def test_line_has_no_bad_cubes(self, line_forest):
        report = bwgl_report(line_forest, epsilon=0.1)
        assert report.max_ratio == 0.0
        assert all(value is not None and value <= 1 / 32 + 1e-6 for value in report.values.values())
        assert set(report.generations.values()) == {1, 2, 3}

    def test_threads_agree(self, line_forest):
        serial = bwgl_report(line_forest, epsilon=0.1)
        threaded = bwgl_report(line_forest, epsilon=0.1, threads=4)
        assert serial.values == threaded.values

    def test_epsilon_positive(self, line_forest):
        with pytest.raises(ParameterError):
            bwgl_report(line_forest, epsilon=0.0)

    def test_csv(self, line_forest, temp_dir):
        report = bwgl_report(line_forest, epsilon=0.1)
        text = write_beta_csv(report, temp_dir / "bwgl.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "cube_id,k,bbeta,is_bad"
        assert sum(1 for line in lines if line.startswith("root,")) == len(line_forest.roots)
        assert len(lines) == 1 + len(line_forest) + len(line_forest.roots)
