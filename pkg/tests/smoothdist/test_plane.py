"""
Tests for approximating planes and flatness integrands
"""

import numpy as np
import pytest

from urlab.exceptions import ParameterError
from urlab.smoothdist import SmoothDistanceField, best_plane, dem_integrands, flatness_deficit


@pytest.fixture(scope="module")
def line_field(line_sample):
    return SmoothDistanceField(line_sample, beta=1.0)


@pytest.mark.unit
class TestBestPlane:
    """Least-squares planes over flat samples"""

    def test_recovers_the_line(self, line_field):
        """The fitted frame is the x-axis"""
        fit = best_plane(line_field, np.array([0.3, 0.5]))
        assert fit.angle_to(np.array([[1.0, 0.0]])) < 1e-6
        assert fit.distance(np.array([0.0, 0.7]))[0] == pytest.approx(0.7, abs=1e-6)

    def test_normalizing_constant_is_one(self, line_field):
        """c_X = 1 when the boundary is a plane"""
        fit = best_plane(line_field, np.array([0.0, 0.5]))
        assert fit.c_x == pytest.approx(1.0, rel=1e-3)

    def test_probe_on_boundary(self, line_field):
        with pytest.raises(ParameterError):
            best_plane(line_field, np.array([0.0, 0.0]))


@pytest.mark.unit
class TestFlatness:
    """Deficits and DEM integrands vanish over planes"""

    @pytest.mark.parametrize("kappa", [(0, 0), (0, 1), (1, 1), (0, 2)])
    def test_flatness_deficit_vanishes(self, line_field, kappa):
        assert flatness_deficit(line_field, np.array([0.1, 0.5]), kappa) < 1e-3

    def test_kappa_order_limited(self, line_field):
        with pytest.raises(ParameterError):
            flatness_deficit(line_field, np.array([0.1, 0.5]), (2, 1))

    def test_dem_integrands_on_line(self, line_field):
        """g2, g1 and wdiv vanish and the indicator is off"""
        values = dem_integrands(line_field, np.array([[0.0, 0.5], [0.3, 0.25]]))
        assert np.all(values.g2 < 1e-3)
        assert np.all(values.g1 < 1e-3)
        assert np.all(values.wdiv < 1e-3)
        assert np.all(values.ind == 0.0)
        assert values.threshold == pytest.approx(0.5 * line_field.plane_gradient)

    def test_indicator_inside_circle_center(self, circle_sample):
        """|grad D| vanishes at the center of a circle"""
        field_ = SmoothDistanceField(circle_sample, beta=1.0)
        values = dem_integrands(field_, np.array([[0.0, 0.0]]))
        assert values.ind[0] == 1.0
