import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photon_gauge_kit.grid import (
    BoundaryDecayWarning,
    MomentumGrid,
    ResolutionError,
    VectorWavefunction,
    fd_weights,
    read_wavefunction,
    write_wavefunction,
)


@given(st.lists(st.floats(-2, 2), min_size=5, max_size=5, unique=True), st.floats(-1, 1))
def test_fd_weights_exact_on_polynomials(nodes, x0):
    x = np.sort(np.array(nodes))
    if np.min(np.diff(x)) < 0.05:
        return
    w = fd_weights(x0, x, 1)
    for deg in range(5):
        exact = deg * x0 ** (deg - 1) if deg else 0.0
        assert w @ x**deg == pytest.approx(exact, abs=1e-8 * (1 + abs(exact)))


def test_fd_weights_classic_central_stencil():
    assert np.allclose(fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 1), [-0.5, 0, 0.5])
    assert np.allclose(fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2), [1, -2, 1])


@pytest.mark.parametrize("spacing", ["uniform", "geometric"])
def test_partial_p_fourth_order(spacing):
    errs = []
    for n in (32, 64):
        g = MomentumGrid.build(n, 8, 8, 0.5, 3.0, p_spacing=spacing)
        p = g.mesh[0]
        errs.append(np.abs(g.partial_p(np.sin(p)) - np.cos(p)).max())
    assert np.log2(errs[0] / errs[1]) > 3.5


def test_partial_phi_spectral():
    g = MomentumGrid.build(6, 8, 16)
    _, _, f = g.mesh
    assert np.allclose(g.partial_phi(np.cos(3 * f)), -3 * np.sin(3 * f), atol=1e-12)


def _theta_test_function(t):
    return np.sin(t) ** 2 * np.cos(t), 2 * np.sin(t) * np.cos(t) ** 2 - np.sin(t) ** 3


def test_barycentric_theta_exact_on_polynomials_in_cos():
    g = MomentumGrid.build(6, 16, 8, theta_scheme="barycentric")
    _, t, _ = g.mesh
    f, df = _theta_test_function(t)
    assert np.abs(g.partial_theta(f) - df).max() < 1e-12


def test_trig3_theta_second_order():
    errs = []
    for n in (20, 40, 80):
        g = MomentumGrid.build(6, n, 8)
        _, t, _ = g.mesh
        f, df = _theta_test_function(t)
        errs.append(np.abs(g.partial_theta(f) - df).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


def test_trig3_exact_on_first_harmonics():
    g = MomentumGrid.build(6, 12, 8)
    _, t, _ = g.mesh
    assert np.allclose(g.partial_theta(np.cos(t)), -np.sin(t), atol=1e-13)
    assert np.allclose(g.partial_theta(np.sin(t)), np.cos(t), atol=1e-13)


def test_gradient_of_linear_cartesian_function():
    g = MomentumGrid.build(24, 24, 16, 0.5, 4.0)
    q = g.mesh[0] * g.unit_vectors[0]
    grad = g.gradient(2 * q[0] - q[1] + 0.5 * q[2])
    assert np.allclose(grad[0], 2, atol=1e-10)
    assert np.allclose(grad[1], -1, atol=1e-10)
    assert np.allclose(grad[2], 0.5, atol=1e-10)


def test_sphere_integral_and_volume():
    g = MomentumGrid.build(41, 16, 16, 1.0, 2.0)
    _, t, _ = g.mesh
    assert g.sphere_integral(np.ones(g.shape[1:])) == pytest.approx(4 * np.pi)
    assert g.sphere_integral(np.cos(t[0]) ** 2) == pytest.approx(4 * np.pi / 3)
    vol = np.sum(g.volume_weights)
    assert vol == pytest.approx(4 * np.pi / 3 * (8 - 1), rel=1e-3)


def test_build_validation():
    with pytest.raises(ResolutionError):
        MomentumGrid.build(8, 8, 7)
    with pytest.raises(ResolutionError):
        MomentumGrid.build(8, 4, 8)
    with pytest.raises(ResolutionError):
        MomentumGrid.build(3, 8, 8)
    with pytest.raises(ValueError):
        MomentumGrid.build(8, 8, 8, 2.0, 1.0)
    with pytest.raises(ValueError):
        MomentumGrid.build(8, 8, 8, p_spacing="chebyshev")


def test_wavefunction_weights_and_readonly():
    g = MomentumGrid.build(8, 8, 8)
    psi = VectorWavefunction(g, np.ones((3,) + g.shape), alpha=0.5, helicity=1)
    with pytest.raises(ValueError):
        psi.values[0, 0, 0, 0] = 2
    assert psi.norm() ** 2 == pytest.approx(psi.inner(psi).real)
    with pytest.raises(ValueError):
        VectorWavefunction(g, np.ones((3, 2, 2, 2)))
    with pytest.raises(ValueError):
        VectorWavefunction(g, np.full((3,) + g.shape, np.nan))


def test_boundary_warning():
    g = MomentumGrid.build(8, 8, 8)
    psi = VectorWavefunction(g, np.ones((3,) + g.shape))
    with pytest.warns(BoundaryDecayWarning):
        psi.warn_if_not_decayed()


def test_wavefunction_roundtrip(tmp_path, rng):
    g = MomentumGrid.build(5, 8, 8, 0.3, 2.0, p_spacing="geometric")
    v = rng.normal(size=(3,) + g.shape) + 1j * rng.normal(size=(3,) + g.shape)
    psi = VectorWavefunction(g, v, alpha=-0.5, helicity=-1)
    path = tmp_path / "psi.txt"
    write_wavefunction(path, psi)
    lines = path.read_text().splitlines()
    assert lines[0] == "# photon-gauge-kit wavefunction v1"
    body = [l for l in lines if not l.startswith("#")]
    assert body[0].split()[:4] == ["0", "0", "0", "-1"]
    assert body[1].split()[:4] == ["0", "0", "0", "0"]
    assert body[3].split()[:4] == ["0", "0", "1", "-1"]
    back = read_wavefunction(path)
    assert np.array_equal(back.values, psi.values)
    assert back.alpha == -0.5 and back.helicity == -1
    assert np.array_equal(back.grid.p_nodes, g.p_nodes)


def test_read_wavefunction_rejects_other_files(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("hello\n")
    with pytest.raises(ValueError):
        read_wavefunction(path)
