"""
Tests for report models
"""

import pytest

from urlab.exceptions import ValidationError
from urlab.models import (
    BallValue,
    BetaReport,
    CarlesonReport,
    SolveReport,
    TrendSummary,
    UniformityReport,
)


def _ball(value, r=0.25):
    return BallValue(center=[0.0, 0.0], r=r, value=value, cells_used=0 if value is None else 10)


@pytest.mark.unit
class TestReportValidation:
    """Reports validate themselves on construction"""

    def test_solve_report(self):
        with pytest.raises(ValidationError):
            SolveReport(residual=0.0, weighted_residual=0.0, iterations=-1, solver="cg", tolerance=1e-8)

    def test_uniformity_epsilon_range(self):
        with pytest.raises(ValidationError):
            UniformityReport(epsilon=1.5, chain_length_fit=(1.0, 0.0), samples_tested=3)

    def test_ball_value(self):
        assert not _ball(None).present
        with pytest.raises(ValidationError):
            _ball(-1.0)

    def test_carleson_sup_matches_table(self):
        balls = [_ball(0.5), _ball(None), _ball(0.25)]
        report = CarlesonReport(
            tag="hess_u", h=0.01, cutoff=0.02, d=1, n=2, scales=[0.25], balls=balls, sup=0.5, argmax=balls[0], coverage=1.0
        )
        assert len(report.present) == 2
        with pytest.raises(ValidationError):
            CarlesonReport(
                tag="hess_u", h=0.01, cutoff=0.02, d=1, n=2, scales=[0.25], balls=balls, sup=0.4, argmax=None, coverage=1.0
            )

    def test_empty_carleson_reports_zero(self):
        with pytest.raises(ValidationError):
            CarlesonReport(
                tag="x", h=0.01, cutoff=0.02, d=1, n=2, scales=[0.25], balls=[_ball(None)], sup=1.0, argmax=None, coverage=0.0
            )


@pytest.mark.unit
class TestTrendSummary:
    def _trend(self, sups, label="bounded"):
        return TrendSummary(
            hs=[0.1, 0.05][: len(sups)], sups=sups, slope=0.0, relative_slope=0.0, ratios=[], differences=[], classification=label
        )

    def test_divergence_flag(self):
        assert self._trend([1.0, 2.0], "log_divergent").is_divergent
        assert not self._trend([1.0, 1.0]).is_divergent

    def test_bounded_within(self):
        assert self._trend([1.0, 1.4]).bounded_within(1.5)
        assert not self._trend([1.0, 1.6]).bounded_within(1.5)
        assert self._trend([0.0, 0.0]).bounded_within(1.5)

    def test_unknown_class(self):
        with pytest.raises(ValidationError):
            self._trend([1.0, 1.0], "oscillating")


@pytest.mark.unit
class TestBetaReport:
    def test_rows_sorted_and_flagged(self):
        report = BetaReport(
            epsilon=0.1,
            values={2: 0.05, 1: 0.2, 3: None},
            seed_values={1: 0.3, 2: 0.05, 3: None},
            generations={1: 0, 2: 1, 3: 1},
            planes={},
            ratios={1: 1.0},
            max_ratio=1.0,
        )
        assert report.rows() == [(1, 0, 0.2, True), (2, 1, 0.05, False), (3, 1, None, False)]

    def test_to_dict_is_plain(self):
        report = BetaReport(
            epsilon=0.1, values={1: 0.0}, seed_values={1: 0.0}, generations={1: 0}, planes={}, ratios={1: 0.0}, max_ratio=0.0
        )
        assert report.to_dict()["values"] == {"1": 0.0}
