import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densgeo import PeriodicGrid
from densgeo.errors import ConfigError, MeanNotZero, WrongDimension

from conftest import trig_poly

coeff_lists = st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=6)


def test_bad_construction():
    with pytest.raises(ConfigError):
        PeriodicGrid(3)
    with pytest.raises(ConfigError):
        PeriodicGrid(16, dim=3)


@given(coeff_lists)
@settings(max_examples=30, deadline=None)
def test_derivative_exact_on_trig(coeffs):
    g = PeriodicGrid(64)
    x = g.x
    f = trig_poly(x, coeffs)
    df = sum(2 * np.pi * k * (-a * np.sin(2 * np.pi * k * x) + b * np.cos(2 * np.pi * k * x))
             for k, (a, b) in enumerate(coeffs, start=1))
    assert np.max(np.abs(g.derivative(f) - df)) < 1e-10


@given(coeff_lists, st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_antiderivative_inverts_derivative(coeffs, c):
    g = PeriodicGrid(64)
    f = trig_poly(g.x, coeffs) + c
    F = g.antiderivative(f)
    assert F[0] == pytest.approx(0.0, abs=1e-14)
    assert np.max(np.abs(g.derivative(F - c * g.x) - (f - c))) < 1e-10


@given(coeff_lists)
@settings(max_examples=30, deadline=None)
def test_hs_inverse(coeffs):
    g = PeriodicGrid(64)
    m = trig_poly(g.x, coeffs)
    v = g.hs_inverse(m)
    assert v[0] == pytest.approx(0.0, abs=1e-14)
    assert np.max(np.abs(-g.derivative(v, 0, 2) - m)) < 1e-9


def test_inverse_laplacian_2d():
    g = PeriodicGrid(32, 2)
    X, Y = g.coords()
    f = np.sin(2 * np.pi * X) * np.cos(4 * np.pi * Y)
    u = g.inv_laplacian_meanzero(f)
    assert np.max(np.abs(g.laplacian(u) - f)) < 1e-12
    with pytest.raises(MeanNotZero):
        g.inv_laplacian_meanzero(f + 1.0, strict=True)


def test_helmholtz_kills_gradients():
    g = PeriodicGrid(32, 2)
    X, Y = g.coords()
    w = np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    assert np.max(np.abs(g.helmholtz_divfree(g.gradient(w)))) < 1e-12
    rot = np.array([g.derivative(w, 1), -g.derivative(w, 0)])
    assert np.max(np.abs(g.helmholtz_divfree(rot) - rot)) < 1e-12


def test_quadrature_and_heat():
    g = PeriodicGrid(64)
    assert g.integrate(np.ones(64)) == pytest.approx(1.0)
    f = np.cos(2 * np.pi * g.x)
    assert np.max(np.abs(g.heat(f, 0.01) - np.exp(-(2 * np.pi) ** 2 * 0.01) * f)) < 1e-14


def test_dealias_truncates():
    g = PeriodicGrid(64)
    low = np.cos(2 * np.pi * 5 * g.x)
    high = np.cos(2 * np.pi * 25 * g.x)
    assert np.max(np.abs(g.dealias(low + high) - low)) < 1e-12


def test_evaluate_and_interpolate():
    g = PeriodicGrid(64)
    f = np.sin(2 * np.pi * g.x) + 0.3 * np.cos(6 * np.pi * g.x)
    y = np.linspace(-0.3, 1.7, 37)
    exact = np.sin(2 * np.pi * y) + 0.3 * np.cos(6 * np.pi * y)
    assert np.max(np.abs(g.evaluate(f, y) - exact)) < 1e-12
    assert np.max(np.abs(g.interpolate(f, y) - exact)) < 1e-3
    g2 = PeriodicGrid(32, 2)
    X, Y = g2.coords()
    f2 = np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)
    pts = np.array([[0.11, 0.52], [0.93, 0.27]])
    ex = np.sin(2 * np.pi * pts[0]) * np.cos(2 * np.pi * pts[1])
    assert np.max(np.abs(g2.evaluate(f2, pts) - ex)) < 1e-12


def test_one_dimensional_only():
    g = PeriodicGrid(16, 2)
    with pytest.raises(WrongDimension):
        g.antiderivative(np.zeros(g.shape))
    with pytest.raises(WrongDimension):
        PeriodicGrid(16, length=2.0).hs_inverse(np.zeros(16))
