"""FD4 calculus on the radial grid: exactness, parity, order, quadrature."""

import numpy as np
import pytest

from wavemaplab.grid import (
    Grid,
    RadialField,
    derivative,
    evaluate_at,
    fd_weights,
    quadrature,
    second_derivative,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(31)
    with pytest.raises(ValueError):
        Grid(64)
    g = Grid(33)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert g.spacing == pytest.approx(1.0 / 32.0)


def test_field_validation():
    g = Grid(33)
    with pytest.raises(ValueError):
        RadialField(g, np.zeros(10))


def test_fd_weights_reproduce_classical_stencils():
    h = 0.1
    x = np.arange(-2.0, 3.0) * h
    w = fd_weights(x, 0.0, 1)
    assert np.allclose(w * 12 * h, [1.0, -8.0, 0.0, 8.0, -1.0], atol=1e-12)
    w2 = fd_weights(x, 0.0, 2)
    assert np.allclose(w2 * 12 * h * h, [-1.0, 16.0, -30.0, 16.0, -1.0], atol=1e-12)


class TestDerivative:
    def test_exact_on_quadratic(self):
        g = Grid(65)
        f = RadialField.from_function(g, lambda r: r * r)
        df = derivative(f)
        assert np.max(np.abs(df.values - 2 * g.nodes)) < 1e-13

    def test_exact_on_quartic(self):
        g = Grid(65)
        f = RadialField.from_function(g, lambda r: r**4 - 0.3 * r * r)
        df = derivative(f)
        assert np.max(np.abs(df.values - (4 * g.nodes**3 - 0.6 * g.nodes))) < 1e-12

    def test_constant_to_zero(self):
        g = Grid(513)
        df = derivative(RadialField.from_function(g, lambda r: np.full_like(r, 2.7)))
        assert np.max(np.abs(df.values)) < 1e-12

    def test_even_parity_at_origin(self):
        g = Grid(65)
        f = RadialField.from_function(g, lambda r: np.cos(3 * r))
        assert derivative(f).values[0] == 0.0

    def test_order_on_profile(self):
        # derivative of 2 arctan(rho)/rho against its closed form
        def exact(r):
            out = (2.0 / r) * (1.0 / (1.0 + r * r) - np.arctan(r) / r)
            return np.where(r == 0, 0.0, out)

        errs = []
        for n in (65, 129, 257):
            g = Grid(n)
            r = g.nodes
            with np.errstate(invalid="ignore", divide="ignore"):
                ref = exact(r)
            f = RadialField(g, 2.0 * np.where(r == 0, 1.0, np.arctan(r) / np.where(r == 0, 1, r)))
            errs.append(np.max(np.abs(derivative(f).values - ref)))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 3.8 and order2 > 3.8


class TestSecondDerivative:
    def test_exact_on_quartic(self):
        g = Grid(33)
        f = RadialField.from_function(g, lambda r: r**4)
        d2 = second_derivative(f)
        assert np.max(np.abs(d2.values - 12 * g.nodes**2)) < 1e-12

    def test_constant_to_zero(self):
        g = Grid(129)
        d2 = second_derivative(RadialField.from_function(g, lambda r: np.full_like(r, 1.1)))
        assert np.max(np.abs(d2.values)) < 1e-10

    def test_order_on_lorentzian(self):
        def exact(r):
            return (6 * r * r - 2) / (1 + r * r) ** 3

        errs = []
        for n in (65, 129, 257):
            g = Grid(n)
            f = RadialField.from_function(g, lambda r: 1.0 / (1.0 + r * r))
            errs.append(np.max(np.abs(second_derivative(f).values - exact(g.nodes))))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 3.8 and order2 > 3.8


class TestQuadrature:
    def test_monomials(self):
        g = Grid(2049)
        one = RadialField.from_function(g, lambda r: np.ones_like(r))
        assert quadrature(one, 4) == pytest.approx(0.2, abs=1e-12)
        sq = RadialField.from_function(g, lambda r: r * r)
        assert quadrature(sq, 4) == pytest.approx(1.0 / 7.0, abs=1e-10)

    def test_lorentzian_weight4(self):
        # exact value of the integral of rho^4/(1+rho^2) is pi/4 - 2/3
        g = Grid(513)
        f = RadialField.from_function(g, lambda r: 1.0 / (1.0 + r * r))
        assert quadrature(f, 4) == pytest.approx(np.pi / 4 - 2.0 / 3.0, abs=1e-10)

    def test_complex_values(self):
        g = Grid(65)
        f = RadialField.from_function(g, lambda r: (1 + 2j) * r * r)
        assert quadrature(f, 0) == pytest.approx((1 + 2j) / 3.0, abs=1e-8)


class TestEvaluateAt:
    def test_nodes_verbatim(self):
        g = Grid(65)
        rng = np.random.default_rng(3)
        f = RadialField(g, rng.normal(size=g.n))
        for i in (0, 1, 17, 63, 64):
            assert evaluate_at(f, g.nodes[i]) == f.values[i]

    def test_cubic_exact(self):
        g = Grid(33)
        coef = np.array([0.3, -1.2, 0.7, 2.0])
        poly = np.polynomial.Polynomial(coef)
        f = RadialField.from_function(g, poly)
        rng = np.random.default_rng(11)
        pts = rng.uniform(0.0, 1.0, 200)
        got = evaluate_at(f, pts)
        assert np.max(np.abs(got - poly(pts))) < 1e-13

    def test_domain(self):
        g = Grid(33)
        f = RadialField(g, np.zeros(33))
        with pytest.raises(ValueError):
            evaluate_at(f, 1.01)

    def test_order_on_profile(self):
        pts = np.linspace(0.013, 0.987, 301)
        ref = 2.0 * np.arctan(pts) / pts
        errs = []
        for n in (65, 129, 257):
            g = Grid(n)
            r = g.nodes
            vals = 2.0 * np.where(r == 0, 1.0, np.arctan(r) / np.where(r == 0, 1, r))
            f = RadialField(g, vals)
            errs.append(np.max(np.abs(evaluate_at(f, pts) - ref)))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 3.8 and order2 > 3.8
