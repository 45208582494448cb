"""
Tests for the smooth distance D_beta
"""

import math
import warnings

import numpy as np
import pytest

from urlab.exceptions import ParameterError, ResolutionError
from urlab.smoothdist import (
    SmoothDistanceField,
    c_beta,
    c_beta_closed_form,
    comparability_constant,
    eval_smooth_distance,
    tail_constant,
)


@pytest.fixture(scope="module")
def line_field(line_sample):
    return SmoothDistanceField(line_sample, beta=1.0)


@pytest.mark.unit
class TestCBeta:
    """Normalizing constant of the plane kernel"""

    def test_line_beta_one_is_pi(self):
        assert c_beta(1, 1.0) == pytest.approx(math.pi, rel=1e-10)

    @pytest.mark.parametrize("d,beta", [(1, 0.5), (2, 1.0), (2, 2.5), (1.5, 1.0)])
    def test_quadrature_matches_closed_form(self, d, beta):
        assert c_beta(d, beta) == pytest.approx(c_beta_closed_form(d, beta), rel=1e-9)

    def test_beta_must_be_positive(self):
        with pytest.raises(ParameterError):
            c_beta(1, 0.0)


@pytest.mark.unit
class TestSmoothDistance:
    """Values and derivatives over a line"""

    def test_line_value(self, line_field):
        """D_1 = delta / pi over a line"""
        value = eval_smooth_distance(line_field, np.array([0.0, 1.0]))
        assert value.D == pytest.approx(1.0 / math.pi, rel=1e-3)

    def test_line_gradient(self, line_field):
        """grad D_1 points away from the line with length 1/pi"""
        values = line_field.evaluate(np.array([[0.2, 0.5], [-0.3, 0.25]]), order=1)
        assert np.allclose(values.grad_D[:, 0], 0.0, atol=1e-4)
        assert np.allclose(values.grad_D[:, 1], line_field.plane_gradient, rtol=1e-3)

    def test_line_hessian_vanishes(self, line_field):
        """D_1 is affine over a line"""
        values = line_field.evaluate(np.array([[0.0, 0.5]]), order=2)
        assert np.max(np.abs(values.hess_D)) < 1e-3

    def test_tree_matches_direct(self, line_field):
        """Cluster-tree sums agree with the direct atom sum"""
        X = np.array([[0.1, 0.3], [0.7, 0.9], [-0.4, 0.2]])
        tree = line_field.evaluate(X, order=2)
        direct = line_field.direct(X, order=2)
        assert np.allclose(tree.R, direct.R, rtol=1e-6)
        assert np.allclose(tree.grad_R, direct.grad_R, rtol=1e-5, atol=1e-8)

    def test_close_probe_raises(self, line_field):
        """Probes within two spacings of an atom are rejected"""
        with pytest.raises(ResolutionError):
            line_field.evaluate(np.array([[0.0, 0.01]]))

    def test_close_probe_nan(self, line_field):
        """on_close='nan' masks unresolved probes"""
        values = line_field.evaluate(np.array([[0.0, 0.01], [0.0, 0.5]]), on_close="nan")
        assert math.isnan(values.D[0])
        assert math.isfinite(values.D[1])

    def test_order_checked(self, line_field):
        with pytest.raises(ParameterError):
            line_field.evaluate(np.array([[0.0, 0.5]]), order=3)

    def test_tree_walk_does_not_overflow(self, line_field):
        """Points inside a cluster's bounding sphere descend without overflow warnings"""
        X = np.array([[0.0, 0.05], [0.013, 0.045], [0.5, 0.06]])
        with warnings.catch_warnings():
            warnings.filterwarnings("error", message=".*overflow", category=RuntimeWarning)
            values = line_field.evaluate(X, order=2)
        assert np.all(np.isfinite(values.D))

    def test_with_beta_shares_tree(self, line_field):
        """Changing beta keeps the cluster tree"""
        other = line_field.with_beta(0.5)
        assert other.root is line_field.root
        assert other.beta == 0.5

    def test_comparability_on_line(self, line_field):
        """D / delta = 1/pi everywhere, so C_beta = pi"""
        probes = np.array([[0.0, 0.5], [0.5, 0.25], [-0.5, 1.0]])
        assert comparability_constant(line_field, probes) == pytest.approx(math.pi, rel=1e-3)

    def test_tail_constant_nonnegative(self, line_field):
        """Truncated sums never exceed the full sum"""
        assert tail_constant(line_field, np.array([0.0, 0.5]), [1, 2, 3]) >= 0.0
