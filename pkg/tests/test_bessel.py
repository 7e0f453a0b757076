import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from gfflab.bessel import j0, j1


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(600)
_T = 0.5 * np.pi * (_NODES + 1)


def j0_integral(x):
    # J0(x) = (1/pi) int_0^pi cos(x sin t) dt, Gauss-Legendre with 600 nodes
    return 0.5 * float(_WEIGHTS @ np.cos(x * np.sin(_T)))


def j1_integral(x):
    # J1(x) = (1/pi) int_0^pi cos(t - x sin t) dt
    return 0.5 * float(_WEIGHTS @ np.cos(_T - x * np.sin(_T)))


@pytest.mark.parametrize("x", [0.0, 1e-8, 0.3, 2.404825557695773, 4.99, 5.0, 5.01, 7.3, 19.0, 55.5, 140.0])
def test_against_integral_representation(x):
    assert abs(j0(x) - j0_integral(x)) < 1e-12
    assert abs(j1(x) - j1_integral(x)) < 1e-12


def test_against_scipy_on_wide_grid():
    x = np.concatenate([np.linspace(-30, 30, 20001), np.logspace(-6, 4, 5000)])
    np.testing.assert_allclose(j0(x), special.j0(x), rtol=0, atol=1e-15)
    np.testing.assert_allclose(j1(x), special.j1(x), rtol=0, atol=1e-15)


def test_special_values():
    assert j0(0.0) == 1.0
    assert j1(0.0) == 0.0
    assert abs(j0(2.404825557695773)) < 1e-15


@given(st.floats(min_value=-1e3, max_value=1e3, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_parity(x):
    assert j0(x) == j0(-x)
    assert j1(x) == -j1(-x)


@given(st.floats(min_value=0.5, max_value=200.0))
@settings(max_examples=100, deadline=None)
def test_wronskian_type_recurrence(x):
    # J0' = -J1, checked by a central difference
    h = 1e-5
    deriv = (j0(x + h) - j0(x - h)) / (2 * h)
    assert abs(deriv + j1(x)) < 1e-8


def test_shapes_preserved():
    x = np.linspace(0, 10, 12).reshape(3, 4)
    assert j0(x).shape == (3, 4)
    assert isinstance(j1(2.0), float)
