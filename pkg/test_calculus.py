import numpy as np
import pytest

from engines.bicomplex import Bicomplex
from engines.calculus import (
    cumulative_cubic,
    gauss_legendre_panels,
    gradient_2d,
    gradient_3d,
    laplacian_2d,
)
from engines.errors import StepTooLarge
from system.metrics import metrics


def test_gradient_2d_polynomial():
    x, y = np.array([0.1, -0.4]), np.array([0.3, 0.2])
    fx, fy = gradient_2d(lambda x, y: x ** 2 * y + 0j, x, y)
    assert np.allclose(fx, 2 * x * y, atol=1e-10)
    assert np.allclose(fy, x ** 2, atol=1e-10)


def test_gradient_2d_bicomplex_values():
    fx, fy = gradient_2d(lambda x, y: Bicomplex(np.exp(x), np.sin(y)), 0.2, 0.5)
    assert fx.isclose(Bicomplex(np.exp(0.2), 0), atol=1e-9)
    assert fy.isclose(Bicomplex(0, np.cos(0.5)), atol=1e-9)


def test_gradient_2d_rejects_a_coarse_step():
    with pytest.raises(StepTooLarge):
        gradient_2d(lambda x, y: np.exp(40 * x) + 0j, 0.0, 0.0, h=0.2)


def test_richardson_checks_are_counted():
    gradient_2d(lambda x, y: x * y + 0j, 0.1, 0.2)
    laplacian_2d(lambda x, y: x * x + 0j, 0.1, 0.2)
    # one comparison per axis plus one for the laplacian
    assert metrics.get_counter_value("richardson_checks") == 3
    assert metrics.get_counter_value("richardson_rejected") == 0
    with pytest.raises(StepTooLarge):
        gradient_2d(lambda x, y: np.exp(40 * x) + 0j, 0.0, 0.0, h=0.2)
    assert metrics.get_counter_value("richardson_rejected") == 1
    assert metrics.get_gauge_value("richardson_max_estimate") > 1e-6


def test_constant_fields_on_the_stencil():
    fx, fy = gradient_2d(lambda x, y: Bicomplex(2, 1j), np.array([0.1, 0.4]), np.array([0.0, 0.3]))
    assert fx.shape == (2,)
    assert fx.isclose(0) and fy.isclose(0)
    assert np.allclose(laplacian_2d(lambda x, y: 3.0 + 0j, 0.1, 0.2), 0)


def test_laplacian():
    x, y = np.array([0.3]), np.array([-0.6])
    assert np.allclose(laplacian_2d(lambda x, y: x ** 2 - y ** 2 + 0j, x, y), 0, atol=1e-8)
    lap = laplacian_2d(lambda x, y: np.exp(x) * np.cos(2 * y) + 0j, x, y)
    assert np.allclose(lap, -3 * np.exp(x) * np.cos(2 * y), atol=1e-7)


def test_gradient_3d_shape_and_values():
    def f(p):
        x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
        return np.stack([x1 * x2, x3 ** 2, x1 + 0 * x2, np.sin(x2)], axis=-1)

    pts = np.array([[0.2, -0.3, 0.5], [1.0, 0.0, -1.0]])
    g = gradient_3d(f, pts)
    assert g.shape == (2, 3, 4)
    expected = np.zeros((2, 3, 4))
    for i, (x1, x2, x3) in enumerate(pts):
        expected[i, 0] = [x2, 0, 1, 0]
        expected[i, 1] = [x1, 0, 0, np.cos(x2)]
        expected[i, 2] = [0, 2 * x3, 0, 0]
    assert np.allclose(g, expected, atol=1e-8)


def test_cumulative_cubic_exact_for_cubics():
    t = np.linspace(0, 1, 9)
    out = cumulative_cubic(t ** 3 - 2 * t, t[1] - t[0])
    assert np.allclose(out, t ** 4 / 4 - t ** 2, atol=1e-14)
    assert out[0] == 0


def test_cumulative_cubic_fourth_order():
    errors = []
    for n in (65, 129):
        t = np.linspace(0, 1, n)
        out = cumulative_cubic(np.cos(t), t[1] - t[0])
        errors.append(np.max(np.abs(out - np.sin(t))))
    assert errors[1] < 1e-9
    assert errors[0] / errors[1] > 12


def test_cumulative_cubic_along_axis():
    t = np.linspace(0, 2, 33)
    values = np.stack([t, 2 * t])
    out = cumulative_cubic(values.T, t[1] - t[0], axis=0)
    assert out.shape == (33, 2)
    assert np.allclose(out[:, 1], t ** 2)
    with pytest.raises(ValueError):
        cumulative_cubic(np.ones(3), 0.5)


def test_gauss_legendre_panels():
    nodes, weights = gauss_legendre_panels(8, 4)
    assert nodes.shape == weights.shape == (32,)
    assert np.isclose(weights.sum(), 1.0)
    assert np.isclose(np.sum(weights * nodes ** 15), 1 / 16)
    assert np.all((nodes > 0) & (nodes < 1))
