import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import normal_pdf
from uncertainty_lab.grid import (Field1D, Field2D, Grid1D, Grid2D, GridError, d_dq, derivative,
                                  integrate, integrate2d, partial_derivative, simpson_weights)

finite = st.floats(-10, 10, allow_nan=False)


def test_constant_has_zero_derivative():
    g = Grid1D(-1, 1, 64)
    assert np.all(derivative(Field1D(g, np.full(64, 3.5))).values == 0)


def test_linear_is_differentiated_exactly():
    g = Grid1D(-1, 1, 64)
    d = derivative(Field1D.from_function(g, lambda q: q)).values
    assert np.max(np.abs(d - 1)) <= 1e-12


def test_sine_derivative_fourth_order():
    g = Grid1D(-np.pi, np.pi, 2048)
    d = derivative(Field1D.from_function(g, np.sin)).values
    assert np.max(np.abs(d - np.cos(g.nodes))) <= 1e-8


def test_quartic_is_exact_including_edges():
    # 5-point stencils, central and one-sided, are exact on degree-4 polynomials
    g = Grid1D(-2, 3, 41)
    q = g.nodes
    d = g.derivative(q**4 - 2 * q**3 + q)
    assert np.max(np.abs(d - (4 * q**3 - 6 * q**2 + 1))) <= 1e-10


def test_too_coarse():
    with pytest.raises(GridError, match="grid too coarse"):
        d_dq(np.zeros(4), 0.1)
    with pytest.raises(GridError):
        Grid1D(0, 1, 15)
    with pytest.raises(GridError):
        Grid1D(1, 0, 32)


def test_non_finite_rejected():
    g = Grid1D(0, 1, 32)
    v = np.zeros(32)
    v[3] = np.nan
    with pytest.raises(GridError):
        Field1D(g, v)
    with pytest.raises(GridError):
        g.integrate(v)


def test_zero_integrand():
    g = Grid1D(-1, 1, 101)
    assert integrate(Field1D(g, np.zeros(101))) == 0.0


def test_gaussian_normalization():
    g = Grid1D(-8, 8, 2048)
    assert abs(integrate(Field1D.from_function(g, normal_pdf)) - 1) <= 1e-9


def test_odd_integrand_vanishes():
    g = Grid1D(-8, 8, 2049)
    assert abs(integrate(Field1D.from_function(g, lambda q: q * normal_pdf(q)))) <= 1e-12


def test_simpson_weights_sum_to_length():
    for n in (16, 17, 100, 2049):
        assert np.isclose(simpson_weights(n, 1.0 / (n - 1)).sum(), 1.0, rtol=0, atol=1e-14)


@pytest.mark.parametrize("n0, order", [(33, 4), (32, 3)])
def test_quadrature_converges_at_advertised_order(n0, order):
    # odd n is pure Simpson; even n ends with one trapezoid interval, which costs one order
    errs = []
    for k in range(3):
        n = (n0 - 1) * 2**k + 1 if n0 % 2 else n0 * 2**k
        g = Grid1D(0, 2, n)
        errs.append(abs(g.integrate(np.exp(g.nodes)) - (np.exp(2) - 1)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > order - 0.3), rates


def test_derivative_converges_at_fourth_order():
    errs = []
    for n in (101, 201, 401):
        g = Grid1D(0, 2, n)
        errs.append(np.max(np.abs(g.derivative(np.exp(g.nodes)) - np.exp(g.nodes))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.7), rates


@given(st.lists(finite, min_size=3, max_size=3), finite, finite)
def test_derivative_is_linear(coefs, a, b):
    g = Grid1D(-3, 3, 64)
    rng = np.random.default_rng(abs(hash(tuple(coefs))) % 2**32)
    f, h = rng.normal(size=64), rng.normal(size=64)
    lhs = g.derivative(a * f + b * h)
    rhs = a * g.derivative(f) + b * g.derivative(h)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)) / g.h * 10)


@given(st.floats(0.2, 3), st.floats(-2, 2), st.floats(0.5, 2))
def test_integral_of_derivative_is_endpoint_difference(k, phase, amp):
    g = Grid1D(-2, 3, 1025)
    f = amp * np.sin(k * g.nodes + phase) + 0.1 * g.nodes**2
    got = g.integrate(g.derivative(f))
    assert abs(got - (f[-1] - f[0])) <= 1e-8


def test_partials_2d():
    a = Grid1D(-2, 2, 41)
    b = Grid1D(-1, 3, 33)
    g = Grid2D(a, b)
    q1, q2 = g.mesh()
    assert np.all(partial_derivative(Field2D(g, q1), 2).values == 0)
    d1 = partial_derivative(Field2D(g, q1 * q2), 1).values
    assert np.max(np.abs(d1 - q2)) <= 1e-12


def test_product_normalization_2d():
    a = Grid1D(-10, 10, 513)
    g = Grid2D(a, Grid1D(-16, 16, 801))
    q1, q2 = g.mesh()
    rho = normal_pdf(q1) * normal_pdf(q2, sigma=2.0)
    assert abs(integrate2d(Field2D(g, rho)) - 1) <= 1e-8


def test_fields_are_read_only():
    g = Grid1D(0, 1, 32)
    f = Field1D(g, np.zeros(32))
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0
