"""
Tests for Carleson functionals and refinement trends
"""

import math

import numpy as np
import pytest

from urlab.carleson import carleson_norm, dyadic_generation, refinement_trend, write_carleson_csv
from urlab.elliptic import GridField
from urlab.exceptions import ParameterError


@pytest.fixture(scope="module")
def unit_density(line_domain):
    """f = sqrt(t), so f^2 delta^(d-n) = 1 over the half-plane"""
    template = GridField.template(line_domain, 1 / 64)
    values = template.sample_function(lambda X: np.sqrt(np.maximum(X[:, 1], 0.0)))
    return template.with_values(values, valid=np.ones(template.shape, dtype=bool))


@pytest.mark.unit
class TestDyadicGeneration:
    def test_generation(self):
        assert dyadic_generation(0.25) == 2
        assert dyadic_generation(1.0) == 0

    def test_non_dyadic(self):
        with pytest.raises(ParameterError):
            dyadic_generation(0.3)


@pytest.mark.unit
class TestCarlesonNorm:
    """Per-ball normalized integrals"""

    def test_half_disk_area(self, unit_density):
        """Value is |B(x, r) ∩ Omega| / r = pi r / 2 up to the boundary row"""
        report = carleson_norm(unit_density, [0.25], centers=np.array([[0.0, 0.0]]), tag="unit")
        assert len(report.balls) == 1
        assert report.sup == pytest.approx(math.pi * 0.25 / 2, rel=0.1)
        assert report.argmax.center == [0.0, 0.0]
        assert report.coverage == 1.0

    def test_larger_ball_larger_value(self, unit_density):
        report = carleson_norm(unit_density, [0.25, 0.5], centers=np.array([[0.0, 0.0]]))
        values = {ball.r: ball.value for ball in report.balls}
        assert values[0.5] > values[0.25]
        assert report.scales == [0.5, 0.25]

    def test_ball_leaving_box_is_absent(self, unit_density):
        report = carleson_norm(unit_density, [0.25], centers=np.array([[0.9, 0.1]]))
        ball = report.balls[0]
        assert not ball.present
        assert ball.reason == "ball leaves the box"
        assert report.sup == 0.0

    def test_ball_cap_past_face_is_absent(self, unit_density):
        """B((0.8, 0), 0.25): the axis point (1.05, 0) is on the line, but the cap above it leaves the box"""
        report = carleson_norm(unit_density, [0.25], centers=np.array([[0.8, 0.0]]))
        assert report.balls[0].reason == "ball leaves the box"

    def test_ball_near_face_is_absent(self, unit_density):
        """B((0.7, 0), 0.25) stays in the box but comes within r/4 of the face x = 1"""
        report = carleson_norm(unit_density, [0.25], centers=np.array([[0.7, 0.0], [0.5, 0.0]]))
        near, clear = report.balls
        assert not near.present
        assert near.reason == "ball leaves the box"
        assert clear.present

    def test_threads_agree(self, unit_density):
        centers = np.array([[0.0, 0.0], [0.25, 0.0], [-0.5, 0.0]])
        serial = carleson_norm(unit_density, [0.25], centers=centers)
        threaded = carleson_norm(unit_density, [0.25], centers=centers, threads=3)
        assert [b.value for b in serial.balls] == [b.value for b in threaded.balls]

    def test_scale_below_cutoff(self, unit_density):
        with pytest.raises(ParameterError):
            carleson_norm(unit_density, [0.0625], centers=np.array([[0.0, 0.0]]))

    def test_scale_not_dyadic(self, unit_density):
        with pytest.raises(ParameterError):
            carleson_norm(unit_density, [0.3], centers=np.array([[0.0, 0.0]]))

    def test_negative_integrand(self, unit_density):
        negative = unit_density.with_values(-unit_density.values - 1.0, valid=unit_density.valid)
        with pytest.raises(ParameterError):
            carleson_norm(negative, [0.25], centers=np.array([[0.0, 0.0]]))

    def test_callable_needs_domain_and_cutoff(self, line_domain):
        with pytest.raises(ParameterError):
            carleson_norm(lambda X: np.ones(len(X)), [0.25])
        with pytest.raises(ParameterError):
            carleson_norm(lambda X: np.ones(len(X)), [0.25], domain=line_domain)

    def test_csv_is_reproducible(self, unit_density, temp_dir):
        report = carleson_norm(
            unit_density, [0.25], centers=np.array([[0.0, 0.0], [0.9, 0.1]]), tag="unit"
        )
        first = write_carleson_csv(report, temp_dir / "a.csv").read_bytes()
        second = write_carleson_csv(report, temp_dir / "b.csv").read_bytes()
        assert first == second
        lines = first.decode().splitlines()
        assert lines[0] == "x0,x1,r,value,cells_used"
        assert lines[2].split(",")[3] == "nan"


@pytest.mark.unit
class TestRefinementTrend:
    """Classification of sups across a cutoff ladder"""

    HS = [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]

    def test_bounded(self):
        assert refinement_trend([1.0, 1.001, 1.002, 1.002], self.HS).classification == "bounded"

    def test_geometric_growth_diverges(self):
        trend = refinement_trend([1.0, 2.0, 4.0, 8.0], self.HS)
        assert trend.classification == "diverging"
        assert trend.is_divergent

    def test_log_growth(self):
        trend = refinement_trend([1.0, 1.5, 2.0, 2.5], self.HS)
        assert trend.classification == "log_divergent"

    def test_order_of_inputs_ignored(self):
        trend = refinement_trend([8.0, 4.0, 2.0, 1.0], list(reversed(self.HS)))
        assert trend.hs == self.HS
        assert trend.classification == "diverging"

    def test_all_zero(self):
        assert refinement_trend([0.0, 0.0], self.HS[:2]).classification == "bounded"

    def test_needs_two_pairs(self):
        with pytest.raises(ParameterError):
            refinement_trend([1.0], [0.1])
