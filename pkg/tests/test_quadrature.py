import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from photon_gauge_kit.quadrature import (
    G_WEIGHTS,
    K_WEIGHTS,
    NODES,
    ConvergenceError,
    adaptive_gk15,
    gauss_legendre,
    gk15,
    theta_rule,
)


def test_kronrod_weights_sum_and_gauss_subset():
    assert math.fsum(K_WEIGHTS) == pytest.approx(2.0, abs=1e-15)
    assert math.fsum(G_WEIGHTS) == pytest.approx(2.0, abs=1e-15)
    g_nodes, g_w = np.polynomial.legendre.leggauss(7)
    assert np.allclose(np.sort(NODES[G_WEIGHTS > 0]), np.sort(g_nodes), atol=1e-15)
    assert np.allclose(np.sort(G_WEIGHTS[G_WEIGHTS > 0]), np.sort(g_w), atol=1e-15)


@pytest.mark.parametrize("deg", range(0, 23))
def test_k15_exact_through_degree_22(deg):
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert NODES**deg @ K_WEIGHTS == pytest.approx(exact, abs=1e-14)


def test_g7_exact_through_13_not_beyond():
    for deg in range(14):
        exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
        assert NODES**deg @ G_WEIGHTS == pytest.approx(exact, abs=1e-14)
    assert abs(NODES**14 @ G_WEIGHTS - 2 / 15) > 1e-6


def test_gauss_legendre_interval_map():
    x, w = gauss_legendre(10, 1.0, 3.0)
    assert w.sum() == pytest.approx(2.0)
    assert x @ w == pytest.approx(4.0)


def test_theta_rule_integrates_odd_sine_powers():
    t, w = theta_rule(40)
    # int sin^3 dcos over the sphere = int_0^pi sin^4 = 3 pi / 8
    assert np.sin(t) ** 3 @ w == pytest.approx(3 * np.pi / 8, rel=1e-14)


def test_gk15_returns_error_estimate():
    val, err = gk15(np.exp, 0.0, 1.0)
    assert val == pytest.approx(np.e - 1, rel=1e-15)
    assert err < 1e-12


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_adaptive_oscillatory_integral():
    f = lambda x: np.sin(7 * x) / (1 + x * x)
    res = adaptive_gk15(f, 0.0, 50.0, rel_tol=1e-14, breakpoints=np.arange(0, 50, np.pi / 7))
    ref, _ = quad(lambda x: 1 / (1 + x * x), 0.0, 50.0, weight="sin", wvar=7,
                  epsabs=1e-15, epsrel=1e-15)
    assert res.value == pytest.approx(ref, abs=1e-14)


def test_adaptive_vector_and_complex_integrand():
    f = lambda x: np.stack([np.exp(1j * x), x**2])
    res = adaptive_gk15(f, 0.0, np.pi)
    assert res.value[0] == pytest.approx(2j, abs=1e-14)
    assert res.value[1] == pytest.approx(np.pi**3 / 3, rel=1e-14)


def test_adaptive_handles_endpoint_singularity():
    res = adaptive_gk15(lambda x: 1 / np.sqrt(x), 0.0, 1.0, abs_tol=1e-10, rel_tol=1e-10)
    assert res.value == pytest.approx(2.0, abs=1e-9)


def test_adaptive_raises_when_interval_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        adaptive_gk15(lambda x: np.sin(1 / x), 1e-8, 1.0, max_intervals=20)
    assert info.value.error > 0


@given(st.floats(-3, 3), st.floats(0.1, 4))
def test_adaptive_polynomial_exact(a, width):
    b = a + width
    res = adaptive_gk15(lambda x: 3 * x**2 - x + 1, a, b)
    exact = (b**3 - a**3) - 0.5 * (b**2 - a**2) + (b - a)
    assert res.value == pytest.approx(exact, rel=1e-13, abs=1e-13)
