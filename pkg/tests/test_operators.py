import numpy as np
import pytest

from photon_gauge_kit import gauge as gb
from photon_gauge_kit.grid import MomentumGrid, VectorWavefunction
from photon_gauge_kit.operators import (
    apply_J,
    apply_L_chi,
    apply_position,
    apply_pryce,
    apply_S_chi,
    basis_state,
    commutator_J_r,
    commutator_r_r,
    component_index,
    convergence_order,
    default_sin_power,
    gauge_covariance_check,
    gauge_transport_check,
    gaussian_state,
    helicity_leakage,
    position_eigen_residual,
    refinement_study,
    spin_coefficient_derivative,
    spin_coefficient_field,
    uncertainty_check,
)

SMALL = ((16, 12, 16), (32, 24, 32))
P_CENTER, WIDTH, ALPHA = 4.5, 0.6, 0.5


def table_gauge():
    th = np.linspace(0.0, np.pi, 65)
    ph = 2 * np.pi * np.arange(64) / 64
    tt, ff = np.meshgrid(th, ph, indexing="ij")
    return gb.GaugeSpec.tabulated(th, ph, 0.8 * np.sin(tt) ** 2 * np.cos(ff) + 0.5 * np.cos(tt))


@pytest.fixture(scope="module")
def grid():
    return MomentumGrid.build(32, 24, 32)


def coefficient_and_gradient(grid):
    """c = P(p) sin^2(theta) (1 + 0.3 sin cos phi) and its Cartesian gradient, by hand."""
    p, t, f = grid.mesh
    r_hat, t_hat, f_hat = grid.unit_vectors
    big_p = p**ALPHA * np.exp(-0.5 * ((p - P_CENTER) / WIDTH) ** 2)
    d_big_p = big_p * (ALPHA / p - (p - P_CENTER) / WIDTH**2)
    st, ct = np.sin(t), np.cos(t)
    ang = st**2 * (1 + 0.3 * st * np.cos(f))
    ang_t = 2 * st * ct * (1 + 0.3 * st * np.cos(f)) + 0.3 * st**2 * ct * np.cos(f)
    ang_f = -0.3 * st**3 * np.sin(f)
    c = big_p * ang
    grad = d_big_p * ang * r_hat + big_p * ang_t / p * t_hat + big_p * ang_f / (p * st) * f_hat
    return c, grad


@pytest.mark.parametrize("gauge", [gb.ZERO_GAUGE, gb.GaugeSpec.linear(1)], ids=["zero", "linear1"])
@pytest.mark.parametrize("lam", [1, -1])
def test_position_acts_on_coefficient(gauge, lam):
    """r psi = i (grad c - alpha p_hat c / p) e_lam, from a hand-derived gradient."""
    errs = []
    for res in SMALL:
        g = MomentumGrid.build(*res)
        _, t, f = g.mesh
        c, grad = coefficient_and_gradient(g)
        e = gb.helicity_vector(lam, t, f, gauge)
        psi = VectorWavefunction(g, c * e, ALPHA, lam)
        p = g.mesh[0]
        r_hat = g.unit_vectors[0]
        worst = 0.0
        for k in range(3):
            want = 1j * (grad[k] - ALPHA * r_hat[k] / p * c) * e
            got = apply_position(psi, gauge, k).values
            worst = max(worst, psi.with_values(got - want).norm() / psi.norm())
        errs.append(worst)
    assert errs[1] < 1e-2
    assert convergence_order(*errs) > 1.7


def test_position_helicity_leakage_is_discretization_error():
    g1 = gb.GaugeSpec.linear(1)
    leak = []
    for res in SMALL:
        psi = gaussian_state(MomentumGrid.build(*res), 1, g1)
        leak.append(max(helicity_leakage(apply_position(psi, g1, k), 1) for k in range(3)))
    assert convergence_order(*leak) > 1.8


def test_position_is_hermitian_in_the_continuum_limit():
    g = gb.GaugeSpec.linear(1)
    asym = []
    for res in ((32, 24, 32), (64, 48, 32)):
        grid = MomentumGrid.build(*res)
        a = gaussian_state(grid, 1, g)
        b = gaussian_state(grid, 1, g, p_center=4.5, width=0.5, angular="axial")
        worst = 0.0
        for k in range(3):
            rb = apply_position(b, g, k)
            lhs = a.inner(rb)
            rhs = np.conj(b.inner(apply_position(a, g, k)))
            worst = max(worst, abs(lhs - rhs) / (a.norm() * rb.norm()))
        asym.append(worst)
    assert asym[1] < 5e-4
    assert asym[1] < 0.7 * asym[0]


def test_eigenrelation_improves_on_geometric_grid():
    errs = {}
    for spacing in ("uniform", "geometric"):
        g = MomentumGrid.build(64, 24, 16, p_spacing=spacing)
        errs[spacing] = position_eigen_residual(basis_state(g, 1, gb.ZERO_GAUGE, 0.5)).relative
    assert errs["geometric"] < errs["uniform"]
    assert errs["geometric"] < 1e-5


def test_translated_eigenstate_recovers_shift():
    shift = (0.1, 0.0, 0.0)
    reps = refinement_study(
        lambda g: position_eigen_residual(basis_state(g, 1, gb.ZERO_GAUGE, 0.5, shift),
                                          gb.ZERO_GAUGE, shift), SMALL)
    assert reps[-1].convergence_order > 1.7


@pytest.mark.parametrize("m", [-2, 0, 1, 3])
def test_jz_eigenvalue_of_axial_basis_field(grid, m):
    g = gb.GaugeSpec.linear(m)
    psi = gaussian_state(grid, 1, g, angular="axial")
    jz = apply_J(psi, 2).values
    assert np.abs(jz - m * psi.values).max() < 1e-10 * np.abs(psi.values).max()


def test_j_equals_orbital_plus_spin_parts(grid):
    g = gb.GaugeSpec.linear(1)
    psi = gaussian_state(grid, 1, g)
    for k in range(3):
        total = apply_J(psi, k).values
        parts = apply_L_chi(psi, g, k).values + apply_S_chi(psi, g, k).values
        rel = psi.with_values(total - parts).norm() / psi.with_values(total).norm()
        assert rel < 5e-2


def test_spin_coefficient_for_axial_gauge_has_constant_z_component(grid):
    s = spin_coefficient_field(grid, gb.GaugeSpec.linear(2))
    assert np.allclose(s[2], 2.0, atol=1e-12)


@pytest.mark.parametrize("gauge", [gb.ZERO_GAUGE, gb.GaugeSpec.linear(-1), table_gauge()],
                         ids=["zero", "linear-1", "table"])
def test_spin_coefficient_derivative_two_routes(grid, gauge):
    for j in range(3):
        for k in range(3):
            exact = spin_coefficient_derivative(grid, gauge, j, k)
            fd = spin_coefficient_derivative(grid, gauge, j, k, method="fd")
            assert np.abs(exact - fd).max() < 1e-5 * (1 + np.abs(exact).max())


def test_rr_commutator_second_order():
    g = gb.GaugeSpec.linear(1)
    reps = refinement_study(lambda gr: commutator_r_r(gaussian_state(gr, 1, g), g, 0, 1), SMALL)
    assert abs(reps[-1].convergence_order - 2) < 0.4


def test_j_r_commutator_exact_for_z_in_axial_gauge(grid):
    for m in (0, 1, -2):
        g = gb.GaugeSpec.linear(m)
        rep = commutator_J_r(gaussian_state(grid, 1, g), g, 2, 0)
        assert rep.relative < 1e-12


def test_j_r_commutator_gauge_term_needed():
    g = gb.GaugeSpec.linear(1)
    grid = MomentumGrid.build(32, 24, 32)
    psi = gaussian_state(grid, 1, g)
    contracted = commutator_J_r(psi, g, 0, 1)
    assert contracted.details["gauge_term_norm"] > 10 * contracted.residual_norm
    repeated = commutator_J_r(psi, g, 0, 1, form="printed")
    assert repeated.relative > 10 * contracted.relative


def test_gauge_covariance_linear_family_is_exact(grid):
    psi = gaussian_state(grid, 1, gb.ZERO_GAUGE)
    for k in range(3):
        assert gauge_covariance_check(psi, gb.ZERO_GAUGE, gb.GaugeSpec.linear(2), k).relative < 1e-12


def test_gauge_covariance_table_second_order():
    t = table_gauge()
    reps = refinement_study(
        lambda gr: gauge_covariance_check(gaussian_state(gr, 1, gb.ZERO_GAUGE), gb.ZERO_GAUGE, t, 2),
        SMALL)
    assert abs(reps[-1].convergence_order - 2) < 0.4


def test_transport_agrees_with_covariance(grid):
    t = table_gauge()
    psi = gaussian_state(grid, 1, gb.ZERO_GAUGE)
    a = gauge_covariance_check(psi, gb.ZERO_GAUGE, t, 0).relative
    b = gauge_transport_check(psi, gb.ZERO_GAUGE, t, 0).relative
    assert a == pytest.approx(b, rel=0.5)


def test_uncertainty_jz_bound_vanishes_in_axial_gauge(grid):
    for m in (0, 1):
        g = gb.GaugeSpec.linear(m)
        psi = gaussian_state(grid, 1, g, angular="axial")
        for k in range(3):
            u = uncertainty_check(psi, g, "z", k, include_j2=False)
            assert u.bound < 1e-10
            assert u.satisfied


def test_uncertainty_robertson_holds_for_jx():
    grid = MomentumGrid.build(16, 12, 16)
    g = gb.GaugeSpec.linear(1)
    u = uncertainty_check(gaussian_state(grid, 1, g), g, "x", "y")
    dj, dr, bound, ok = u
    assert ok and dj * dr >= bound
    assert u.satisfied_J2


def test_string_proximity_raised_for_support_on_axis():
    grid = MomentumGrid.build(8, 8, 8, p_min=0.5, p_max=3.0)
    psi = basis_state(grid, 1, gb.ZERO_GAUGE)
    with pytest.raises(gb.StringProximityError):
        apply_position(psi, gb.ZERO_GAUGE, 0, eps_string=0.3)


def test_helpers():
    assert component_index("y") == 1
    with pytest.raises(ValueError):
        component_index("w")
    assert default_sin_power(gb.GaugeSpec.linear(-3)) == 4
    assert np.isnan(convergence_order(0.0, 1.0))
    untagged = VectorWavefunction(MomentumGrid.build(8, 8, 8), np.ones((3, 8, 8, 8)))
    with pytest.raises(ValueError):
        commutator_J_r(untagged, gb.ZERO_GAUGE, 0, 1)
