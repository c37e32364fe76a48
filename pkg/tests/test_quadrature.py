from math import pi

import numpy as np
import pytest

from dpt.errors import ValidationError
from dpt.quadrature import (
    ball_volume, gauss_legendre, radial_power_integral, simpson_weights, sphere_area,
    sphere_rule, trapezoid_weights,
)


def test_sphere_areas():
    assert sphere_area(2) == pytest.approx(2 * pi)
    assert sphere_area(3) == pytest.approx(4 * pi)
    assert sphere_area(4) == pytest.approx(2 * pi ** 2)
    assert ball_volume(3) == pytest.approx(4 * pi / 3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_rule_total_weight_and_nodes(d):
    rule = sphere_rule(d)
    assert rule.weights.sum() == pytest.approx(sphere_area(d), rel=1e-13)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_second_moments(d):
    """``int e_i e_j ds = |S| delta_ij / d``."""
    rule = sphere_rule(d)
    e = rule.nodes
    mom = rule.integrate(e[:, :, None] * e[:, None, :])
    assert np.allclose(mom, sphere_area(d) / d * np.eye(d), atol=1e-12)


def test_fourth_moment_on_s2():
    """``int x^4 ds = 4 pi / 5`` on the unit sphere in R^3."""
    rule = sphere_rule(3)
    assert rule.integrate(rule.nodes[:, 0] ** 4) == pytest.approx(4 * pi / 5, rel=1e-13)


def test_bad_requests():
    with pytest.raises(ValidationError):
        sphere_rule(5)
    with pytest.raises(ValidationError):
        sphere_rule(3, order=5)


def test_radial_and_line_rules():
    assert radial_power_integral(0.5) == pytest.approx(2 / 3)
    assert radial_power_integral(-1.0) == np.inf
    x, w = gauss_legendre(0.0, 2.0, 5)
    assert w @ x ** 9 == pytest.approx(2 ** 10 / 10)
    assert trapezoid_weights(5, 0.25).sum() == pytest.approx(1.0)
    xs = np.linspace(0, 1, 9)
    assert simpson_weights(9, 0.125) @ xs ** 3 == pytest.approx(0.25)
