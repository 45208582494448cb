"""
Tests for boundary samples and their generators
"""

import math

import numpy as np
import pytest

from urlab.exceptions import DimensionError, ParameterError
from urlab.geometry import cantor_corners, dist_to_boundary, local_hausdorff, make_boundary, verify_ahlfors


@pytest.mark.unit
class TestGenerators:
    """Generated boundary kinds"""

    def test_plane_atoms_and_weights(self, line_sample):
        """Line atoms sit on y = 0 with weight equal to the spacing"""
        assert line_sample.count == 401
        assert np.all(line_sample.points[:, 1] == 0.0)
        assert np.allclose(line_sample.weights, 0.02)
        assert line_sample.d == 1 and line_sample.n == 2
        assert line_sample.tail is not None

    def test_plane_ahlfors_constant(self, line_sample):
        """A line has sigma(B(x,r)) / r close to 2"""
        report = line_sample.ahlfors
        assert report is not None
        assert not report.regularity_failure
        assert 1.8 < report.c_sigma < 2.3

    def test_plane_requires_codimension_one(self):
        """plane with d < n-1 is refused"""
        with pytest.raises(DimensionError):
            make_boundary("plane", {"d": 1, "n": 3})

    def test_low_dim_plane_in_space(self):
        """A line in R^3 is a low-dimensional plane"""
        sample = make_boundary("low_dim_plane", {"d": 1, "n": 3, "extent": 2.0, "spacing": 0.05, "ahlfors_trials": 4})
        assert sample.n == 3
        assert np.allclose(sample.points[:, 1:], 0.0)

    def test_extent_must_be_multiple_of_spacing(self):
        """Non-commensurate extent is a parameter error"""
        with pytest.raises(ParameterError):
            make_boundary("plane", {"extent": 1.0, "spacing": 0.3})

    def test_circle_distance_oracle(self, circle_sample):
        """The circle oracle returns | |X| - R |"""
        X = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 0.5]])
        assert np.allclose(dist_to_boundary(circle_sample, X), [1.0, 1.0, 0.5])

    def test_cantor_generation(self, cantor_sample):
        """Generation g has 4^g atoms of total mass 1"""
        assert cantor_sample.count == 64
        assert math.isclose(cantor_sample.total_mass, 1.0)
        assert cantor_sample.spacing == 4.0**-3

    def test_cantor_corners_nested(self):
        """Every generation-2 corner lies in a generation-1 square"""
        coarse = cantor_corners(1)
        fine = cantor_corners(2)
        inside = [np.any(np.all((c >= coarse) & (c < coarse + 0.25), axis=1)) for c in fine]
        assert all(inside)

    def test_unknown_kind(self):
        """Unknown kinds name the admissible ones"""
        with pytest.raises(ParameterError) as excinfo:
            make_boundary("spiral")
        assert "plane" in excinfo.value.suggestion

    def test_lipschitz_graph_height(self):
        """Atoms lie on (M / omega) sin(omega x)"""
        sample = make_boundary("lipschitz_graph", {"M": 0.3, "extent": 4.0, "spacing": 0.02, "ahlfors_trials": 4})
        x = sample.points[:, 0]
        assert np.allclose(sample.points[:, 1], 0.3 / math.pi * np.sin(math.pi * x))

    def test_custom_points(self):
        """Custom samples take points as given and skip the Ahlfors check"""
        points = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]
        sample = make_boundary("custom", {"points": points})
        assert sample.count == 3
        assert sample.ahlfors is None
        assert sample.spacing == pytest.approx(1.0)


@pytest.mark.unit
class TestSampleOperations:
    """Dilation, rigid motions and comparisons"""

    def test_dilate_scales_mass(self, line_sample):
        """Weights scale like factor^d"""
        big = line_sample.dilate(2.0)
        assert big.total_mass == pytest.approx(2.0 * line_sample.total_mass)
        assert big.spacing == pytest.approx(2 * line_sample.spacing)

    def test_transform_preserves_distance(self, line_sample):
        """Distances are invariant under a rotation plus shift"""
        angle = 0.3
        rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        shift = np.array([0.5, -0.25])
        moved = line_sample.transform(rotation, shift)
        X = np.array([[0.2, 0.7]])
        assert dist_to_boundary(moved, X @ rotation.T + shift) == pytest.approx(dist_to_boundary(line_sample, X))

    def test_transform_rejects_non_orthogonal(self, line_sample):
        """Only rigid motions are accepted"""
        with pytest.raises(ParameterError):
            line_sample.transform(np.array([[2.0, 0.0], [0.0, 1.0]]), np.zeros(2))

    def test_local_hausdorff_self(self, line_sample):
        """A set is at distance zero from itself"""
        assert local_hausdorff(line_sample, line_sample, np.zeros(2), 0.5) == 0.0

    def test_verify_ahlfors_needs_trials(self, line_sample):
        """trials < 1 is refused"""
        with pytest.raises(ParameterError):
            verify_ahlfors(line_sample, 0)
