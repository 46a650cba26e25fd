import math

import numpy as np
import pytest
from scipy import integrate

from fracpkpd.errors import AccuracyError, DomainError
from fracpkpd.operators import (
    generalized_convolution,
    psi_caputo_derivative,
    psi_caputo_derivative_grid,
    psi_rl_integral,
    psi_rl_integral_grid,
    rl_integral_of_constant,
)
from fracpkpd.psi import Identity, Power, Shift, Sqrt

PSIS = [Identity(), Shift(0.2), Power(2.0), Sqrt()]


def power_law(psi, a, beta):
    base = float(psi.value(a))
    return lambda s: (float(psi.value(s)) - base) ** (beta - 1)


class TestRlIntegral:
    @pytest.mark.parametrize("psi", PSIS, ids=lambda p: p.descriptor())
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9, 1.0])
    def test_constant(self, psi, alpha):
        got = psi_rl_integral(lambda s: 2.5, alpha, psi, 0.1, 1.4)
        assert got == pytest.approx(rl_integral_of_constant(2.5, alpha, psi, 0.1, 1.4), rel=1e-9)

    @pytest.mark.parametrize("psi", PSIS, ids=lambda p: p.descriptor())
    @pytest.mark.parametrize("alpha", [0.4, 0.9])
    @pytest.mark.parametrize("beta", [1.0, 1.5, 2.5, 3.0])
    def test_power_law(self, psi, alpha, beta):
        a, t = 0.1, 1.3
        x = float(psi.value(t) - psi.value(a))
        expected = math.gamma(beta) / math.gamma(beta + alpha) * x ** (beta + alpha - 1)
        got = psi_rl_integral(power_law(psi, a, beta), alpha, psi, a, t)
        assert got == pytest.approx(expected, rel=1e-7)

    def test_classical_limit(self):
        # alpha = 1, identity: plain integral
        assert psi_rl_integral(lambda s: s, 1.0, Identity(), 0.0, 1.0) == pytest.approx(0.5, rel=1e-12)
        got = psi_rl_integral(math.cos, 1.0, Identity(), 0.0, 2.0)
        assert got == pytest.approx(math.sin(2.0), rel=1e-12)

    def test_against_direct_quadrature(self):
        # independent check with the weight option of scipy quad
        alpha, t = 0.6, 1.2
        f = lambda s: math.exp(-s) * (1 + s * s)
        ref = integrate.quad(f, 0.0, t, weight="alg", wvar=(0.0, alpha - 1.0))[0]
        # weight (t - s)^(alpha - 1) via the reflection s -> t - s
        ref = integrate.quad(lambda r: f(t - r), 0.0, t, weight="alg", wvar=(alpha - 1.0, 0.0))[0] / math.gamma(alpha)
        assert psi_rl_integral(f, alpha, Identity(), 0.0, t) == pytest.approx(ref, rel=1e-10)

    def test_semigroup(self):
        psi, a, t = Power(2.0), 0.2, 1.1
        f = lambda s: math.sin(s) + 1.0
        inner = lambda s: psi_rl_integral(f, 0.5, psi, a, s, rtol=1e-11) if s > a else 0.0
        nested = psi_rl_integral(inner, 0.3, psi, a, t, rtol=1e-9)
        direct = psi_rl_integral(f, 0.8, psi, a, t)
        assert nested == pytest.approx(direct, rel=1e-8)

    def test_translation_invariance(self):
        f = lambda s: math.cos(3 * s)
        for alpha in (0.5, 0.9):
            a = psi_rl_integral(f, alpha, Identity(), 0.0, 1.0)
            b = psi_rl_integral(f, alpha, Shift(0.2), 0.0, 1.0)
            assert b == pytest.approx(a, rel=1e-12)

    @pytest.mark.parametrize("alpha,a,t", [(0.0, 0.0, 1.0), (-1.0, 0.0, 1.0), (0.5, 1.0, 1.0), (0.5, 1.0, 0.5)])
    def test_domain(self, alpha, a, t):
        with pytest.raises(DomainError):
            psi_rl_integral(lambda s: 1.0, alpha, Identity(), a, t)

    def test_accuracy_error_on_nonintegrable(self):
        with pytest.raises(AccuracyError):
            psi_rl_integral(lambda s: 1.0 / (s - 0.5) if s != 0.5 else 0.0, 0.5, Identity(), 0.0, 1.0)


class TestGridOperators:
    def test_rl_grid_exact_for_linear_in_psi(self):
        psi = Sqrt()
        grid = np.linspace(0.0, 2.0, 41) ** 2 / 2.0
        vals = 1.0 + 3.0 * psi.value(grid)
        out = psi_rl_integral_grid(grid, vals, 0.7, psi)
        x = psi.value(grid)
        expected = x**0.7 / math.gamma(1.7) + 3.0 * x**1.7 / math.gamma(2.7)
        assert np.allclose(out, expected, rtol=1e-12, atol=1e-14)

    def test_caputo_grid_exact_for_linear_in_psi(self):
        psi = Power(2.0)
        grid = np.linspace(0.5, 2.0, 30)
        x = psi.value(grid) - psi.value(0.5)
        vals = 4.0 - 2.0 * x
        out = psi_caputo_derivative_grid(grid, vals, 0.6, psi)
        assert np.allclose(out, -2.0 * x**0.4 / math.gamma(1.4), rtol=1e-12, atol=1e-14)

    def test_caputo_of_constant_is_zero(self):
        out = psi_caputo_derivative_grid(np.linspace(0, 1, 20), np.full(20, 7.0), 0.5, Identity())
        assert np.all(out == 0.0)

    def test_caputo_order_one_is_backward_difference(self):
        grid = np.linspace(0.0, 1.0, 11)
        out = psi_caputo_derivative_grid(grid, grid**2, 1.0, Identity())
        assert out[0] == 0.0
        assert np.allclose(out[1:], grid[1:] + grid[:-1])

    def test_caputo_pointwise(self):
        grid = np.linspace(0.0, 1.0, 11)
        vals = np.sin(grid)
        full = psi_caputo_derivative_grid(grid, vals, 0.8, Identity())
        assert psi_caputo_derivative(grid, vals, 0.8, Identity(), 0.7) == full[7]
        with pytest.raises(AccuracyError):
            psi_caputo_derivative(grid, vals, 0.8, Identity(), 0.3)
        with pytest.raises(DomainError):
            psi_caputo_derivative(grid, vals, 0.8, Identity(), 0.75)

    def test_caputo_rejects_bad_alpha(self):
        with pytest.raises(DomainError):
            psi_caputo_derivative_grid(np.linspace(0, 1, 5), np.zeros(5), 1.5, Identity())


def composition_orders(alpha, psi, levels):
    """Errors of I(D f) - (f - f(a)) at t = 1.5 on dyadic grids."""
    f = lambda s: np.sin(2 * s) + s**2
    a, t = 0.0, 1.5
    errs = []
    for n in levels:
        grid = np.linspace(a, t, n + 1)
        D = psi_caputo_derivative_grid(grid, f(grid), alpha, psi)
        I = psi_rl_integral_grid(grid, D, alpha, psi)
        errs.append(abs(I[-1] - (f(t) - f(a))))
    errs = np.array(errs)
    return errs, np.log2(errs[:-1] / errs[1:])


@pytest.mark.parametrize("alpha", [0.5, 0.9])
@pytest.mark.parametrize("psi", [Identity(), Power(2.0)], ids=lambda p: p.descriptor())
def test_composition_converges(alpha, psi):
    errs, orders = composition_orders(alpha, psi, [128, 256, 512])
    assert errs[-1] < 1e-2
    assert np.all(orders >= 2 - alpha - 0.2)


class TestConvolution:
    def test_commutative_on_polynomials(self):
        rng = np.random.default_rng(3)
        psi, a, t = Power(2.0), 0.3, 1.7
        for _ in range(5):
            p, q = rng.normal(size=4), rng.normal(size=3)
            f, g = np.polynomial.Polynomial(p), np.polynomial.Polynomial(q)
            fg = generalized_convolution(f, g, psi, a, t)
            gf = generalized_convolution(g, f, psi, a, t)
            assert fg == pytest.approx(gf, rel=1e-9, abs=1e-12)

    def test_constants(self):
        # constant * constant over [a, t] gives psi(t) - psi(a)
        got = generalized_convolution(lambda s: 1.0, lambda s: 1.0, Sqrt(), 0.25, 1.0)
        assert got == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("p", [0, 1, 2])
    def test_kernel_identity(self, p):
        # f * kernel_{(p+1) alpha} equals I^{(p+1) alpha} f with the Gamma factor
        psi, a, t, alpha = Power(2.0), 0.2, 1.4, 0.6
        order = (p + 1) * alpha
        base = float(psi.value(a))
        kernel = lambda z: (float(psi.value(z)) - base) ** (order - 1) / math.gamma(order)
        f = lambda s: math.exp(s)
        conv = generalized_convolution(
            f, kernel, psi, a, t, g_singular_exponent=order - 1 if order < 1 else None
        )
        assert conv == pytest.approx(psi_rl_integral(f, order, psi, a, t), rel=1e-9)

    def test_identity_psi_with_constants(self):
        assert generalized_convolution(lambda s: 1.0, lambda s: 1.0, Identity(), 0.0, 1.0) == pytest.approx(1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            generalized_convolution(lambda s: 1.0, lambda s: 1.0, Identity(), 1.0, 0.5)
        with pytest.raises(DomainError):
            generalized_convolution(lambda s: 1.0, lambda s: 1.0, Identity(), 0.0, 1.0, g_singular_exponent=-1.0)
