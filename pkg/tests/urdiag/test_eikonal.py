"""
Tests for the constant-gradient distance check
"""

import numpy as np
import pytest

from urlab.elliptic import GridField
from urlab.exceptions import DomainError, ParameterError
from urlab.urdiag import distance_to_nodes, eikonal_distance_check


@pytest.fixture(scope="module")
def template(line_domain):
    return GridField.template(line_domain, 1 / 16)


@pytest.mark.unit
class TestEikonal:
    """G with |grad G| constant is a multiple of the distance to {G = 0}"""

    def test_distance_to_nodes(self):
        targets = np.array([[0.0, 0.0], [1.0, 0.0]])
        X = np.array([[0.0, 1.0], [0.6, 0.0]])
        assert np.allclose(distance_to_nodes(X, targets), [1.0, 0.4])

    def test_scaled_distance_passes(self, template):
        G = template.with_values(template.sample_function(lambda X: 3.0 * X[:, 1]))
        report = eikonal_distance_check(G)
        assert report.passed
        assert report.is_const_grad
        assert report.c == pytest.approx(3.0)
        assert report.nodes_tested > 0

    def test_quadratic_fails(self, template):
        G = template.with_values(template.sample_function(lambda X: X[:, 1] ** 2))
        report = eikonal_distance_check(G)
        assert not report.is_const_grad
        assert not report.passed

    def test_negative_values(self, template):
        G = template.with_values(template.sample_function(lambda X: X[:, 1] - 0.5))
        with pytest.raises(ParameterError):
            eikonal_distance_check(G)

    def test_no_zero_set(self, template):
        G = template.with_values(template.sample_function(lambda X: X[:, 1] + 1.0))
        with pytest.raises(DomainError):
            eikonal_distance_check(G)
