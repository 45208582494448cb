"""
Tests for the Whitney cover of a domain window
"""

import numpy as np
import pytest

from urlab.constants import WHITNEY_LOWER
from urlab.dyadic import build_whitney
from urlab.exceptions import ParameterError


@pytest.fixture(scope="module")
def cover(line_domain):
    return build_whitney(line_domain, 2.0**-7)


@pytest.mark.unit
class TestWhitneyCover:
    """Whitney condition and lookups"""

    def test_cover_not_empty(self, cover):
        assert len(cover) > 0

    def test_lower_whitney_condition(self, cover):
        """Accepted cubes satisfy dist(W) >= 20 l(W)"""
        assert np.all(cover.distances >= WHITNEY_LOWER * cover.sides * (1 - 1e-12))

    def test_upper_whitney_condition(self, cover):
        """Accepted cubes also satisfy dist(W) < 40 l(W)"""
        assert cover.upper_violations == 0
        assert np.all(cover.distances < 2 * WHITNEY_LOWER * cover.sides)

    def test_side_tracks_height(self, cover):
        """The cube holding (0, 0.2) has 0.2 / 41 < side <= 0.2 / 20"""
        index = cover.locate(np.array([[0.0, 0.2]]))[0]
        assert index >= 0
        side = cover.sides[index]
        assert 0.2 / 41 < side <= 0.2 / 20

    def test_sides_respect_floor(self, cover):
        """No cube is smaller than h_min"""
        assert cover.sides.min() >= 2.0**-7 * (1 - 1e-12)

    def test_centers_in_domain(self, cover, line_domain):
        """Cube centers lie in the box and in the domain"""
        assert np.all(line_domain.contains(cover.centers))
        assert np.all(line_domain.in_box(cover.centers))

    def test_locate_centers(self, cover):
        """Each center is located in its own cube"""
        assert np.array_equal(cover.locate(cover.centers), np.arange(len(cover)))

    def test_locate_uncovered(self, cover):
        """Points hugging the boundary are uncovered"""
        assert cover.locate(np.array([[0.0, 1e-4]]))[0] == -1

    def test_filtered_drops_small_cubes(self, cover):
        """Filtering to a coarser floor keeps only larger cubes"""
        coarse = cover.filtered(2.0**-5)
        assert len(coarse) < len(cover)
        assert coarse.sides.min() >= 2.0**-5 * (1 - 1e-12)
        assert coarse.unresolved_volume > cover.unresolved_volume

    def test_overlap_multiplicity_bounded(self, cover):
        """Dilated cubes overlap a bounded number of times"""
        assert 1 <= cover.overlap_multiplicity() <= 50

    def test_uncovered_fraction_away_from_boundary(self, cover):
        """Everything deeper than 20 * 2h_min is covered"""
        assert cover.uncovered_fraction(floor=0.5) == 0.0

    def test_positive_floor_required(self, line_domain):
        with pytest.raises(ParameterError):
            build_whitney(line_domain, 0.0)

    def test_graded_cells_reach_closer(self, line_domain):
        """A smaller separation ratio covers points nearer the boundary"""
        graded = build_whitney(line_domain, 2.0**-5, ratio=2.0)
        assert graded.ratio == 2.0
        assert np.all(graded.distances >= 2.0 * graded.sides * (1 - 1e-12))
        assert graded.uncovered_fraction(floor=0.25) == 0.0
        assert graded.filtered(2.0**-4).ratio == 2.0

    def test_ratio_positive(self, line_domain):
        with pytest.raises(ParameterError):
            build_whitney(line_domain, 2.0**-5, ratio=0.0)
