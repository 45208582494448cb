"""
Tests for lattice derivatives, the gradient bound and the Caccioppoli check
"""

import numpy as np
import pytest

from urlab.dyadic import build_whitney
from urlab.elliptic import (
    GridField,
    OperatorSpec,
    caccioppoli_check,
    derivative_field,
    dirichlet_clearance,
    gradient_bound_check,
    pole_mask,
)
from urlab.exceptions import ParameterError, PositivityError
from urlab.geometry import DomainBox
from urlab.smoothdist import SmoothDistanceField


@pytest.fixture(scope="module")
def linear(line_domain):
    """u = t on [-1, 1] x [0, 1]"""
    template = GridField.template(line_domain, 1 / 16)
    return template.with_values(template.sample_function(lambda X: X[:, 1]))


@pytest.mark.unit
class TestDerivativeField:
    """Centered differences on masked stencils"""

    def test_linear_gradient(self, linear):
        derivatives = derivative_field(linear, order=2)
        mask = derivatives.mask
        assert np.any(mask)
        assert np.allclose(derivatives.grad[mask], [0.0, 1.0])
        assert np.allclose(derivatives.hess[mask], 0.0, atol=1e-9)

    def test_mask_keeps_away_from_boundary(self, linear):
        derivatives = derivative_field(linear, order=1)
        assert not np.any(derivatives.mask & (linear.delta < 2 * linear.h))
        # outer faces have no full stencil
        assert not np.any(derivatives.mask[0, :])
        assert not np.any(derivatives.mask[:, -1])

    def test_mask_clears_outer_faces(self, linear):
        """Face nodes are Dirichlet, so the first interior row next to them is dropped too"""
        derivatives = derivative_field(linear, order=1)
        assert not np.any(derivatives.mask[1, :])
        assert not np.any(derivatives.mask[:, -2])
        assert np.any(derivatives.mask[2, :])
        clearance = dirichlet_clearance(linear)
        assert not clearance[1, 8]
        assert clearance[2, 8]

    def test_first_order_has_no_hessian(self, linear):
        derivatives = derivative_field(linear, order=1)
        with pytest.raises(ParameterError):
            derivatives.grad_sq_grad

    def test_order_checked(self, linear):
        with pytest.raises(ParameterError):
            derivative_field(linear, order=3)

    def test_vector_fields_rejected(self, linear):
        derivatives = derivative_field(linear, order=1)
        grad = derivatives.as_field("grad")
        assert grad.rank == "vector"
        with pytest.raises(ParameterError):
            derivative_field(grad)

    def test_log_ratio_constant_over_line(self, linear, line_sample):
        """u / D = pi for u = t, so ln(u/D) has vanishing derivatives"""
        derivatives = derivative_field(linear, order=2, field_=SmoothDistanceField(line_sample))
        valid = derivatives.log_mask
        assert np.any(valid)
        assert np.max(np.abs(derivatives.grad_log_ratio[valid])) < 1e-2
        assert np.max(np.abs(derivatives.hess_log_ratio[valid])) < 1e-1

    def test_nonpositive_policy(self, linear, line_sample):
        negative = linear.with_values(-linear.values)
        field_ = SmoothDistanceField(line_sample)
        with pytest.raises(PositivityError):
            derivative_field(negative, field_=field_)
        masked = derivative_field(negative, field_=field_, on_nonpositive="mask")
        assert not np.any(masked.log_mask)

    def test_pole_mask(self, linear):
        with_pole = linear.with_values(linear.values, pole=[0.0, 0.5])
        mask = pole_mask(with_pole)
        assert not mask[with_pole.nearest_index(np.array([0.0, 0.5]))]
        assert mask[0, 0]
        assert np.all(pole_mask(linear))


@pytest.mark.unit
class TestGradientBound:
    """sup delta |grad u| / u"""

    def test_linear_bound_is_one(self, linear):
        report = gradient_bound_check(linear)
        assert report.nodes_tested > 0
        assert report.sup == pytest.approx(1.0, rel=1e-9)

    def test_nonpositive_rejected(self, linear):
        with pytest.raises(PositivityError):
            gradient_bound_check(linear.with_values(linear.values - 0.5))


@pytest.mark.integration
class TestCaccioppoli:
    """Whitney-cube ratios for ln(u/D)"""

    @pytest.fixture(scope="class")
    def tall_field(self, line_sample):
        """u = t (1 + x/10) on [-2, 2] x [0, 6], a positive harmonic function"""
        box = DomainBox(np.array([-2.0, 0.0]), np.array([2.0, 6.0]), line_sample, side="one_side")
        template = GridField.template(box, 1 / 32)
        return template.with_values(template.sample_function(lambda X: X[:, 1] * (1 + 0.1 * X[:, 0])))

    def test_constant_bounded(self, tall_field, line_sample):
        spec = OperatorSpec(1.0, 1, 2)
        whitney = build_whitney(tall_field.domain, tall_field.h)
        report = caccioppoli_check(tall_field, SmoothDistanceField(line_sample), spec, whitney)
        assert report.cubes_tested > 0
        assert report.min_side >= 8 * tall_field.h
        assert 0.0 < report.constant < 1.0

    def test_no_cubes_on_small_box(self, linear, line_sample, line_domain):
        """Whitney cubes of side 8h do not fit in a unit-height box"""
        report = caccioppoli_check(
            linear, SmoothDistanceField(line_sample), OperatorSpec(1.0, 1, 2), build_whitney(line_domain, linear.h)
        )
        assert report.cubes_tested == 0
        assert report.constant == 0.0
