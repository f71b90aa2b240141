"""Photon position, angular-momentum and spin operators on a momentum grid.

Components are Cartesian (0, 1, 2 or "x", "y", "z"); wavefunction entries
are spherical mu-components.  With hbar = 1:

    r_P   = i (grad - alpha p_hat / p) + (p_hat x S) / p
    r     = r_P - a (p_hat . S)                        (gauge chi)
    J     = -i p x grad + S
    L     = r x p,   S_chi = (a x p + p_hat)(p_hat . S),   J = L + S_chi

On a helicity-lam state psi = c(p) e_lam the position operator acts on the
scalar coefficient as i (grad - alpha p_hat / p), so p^alpha e_lam is an
eigenvector with eigenvalue zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .gauge import (
    EPS_STRING,
    ZERO_GAUGE,
    StringProximityError,
    gauge_potential_cartesian,
    helicity_vector,
)
from .grid import MomentumGrid, VectorWavefunction
from .specfun import spin_matrices

__all__ = [
    "OperatorReport",
    "UncertaintyResult",
    "component_index",
    "gradient_p",
    "apply_pryce",
    "apply_position",
    "apply_J",
    "apply_L_chi",
    "apply_S_chi",
    "spin_coefficient_field",
    "spin_coefficient_derivative",
    "spin_coefficient_gradient",
    "commutator_J_r",
    "commutator_r_r",
    "position_eigen_residual",
    "uncertainty_check",
    "gauge_covariance_check",
    "gauge_transport_check",
    "helicity_leakage",
    "basis_state",
    "gaussian_state",
    "default_sin_power",
    "convergence_order",
    "refinement_study",
    "COARSE_RESOLUTION",
    "FINE_RESOLUTION",
]

SPIN = np.array(spin_matrices())
LEVI = np.zeros((3, 3, 3))
LEVI[0, 1, 2] = LEVI[1, 2, 0] = LEVI[2, 0, 1] = 1.0
LEVI[0, 2, 1] = LEVI[2, 1, 0] = LEVI[1, 0, 2] = -1.0

# (n_p, n_theta, n_phi)
COARSE_RESOLUTION = (32, 24, 32)
FINE_RESOLUTION = (64, 48, 32)
SUPPORT_THRESHOLD = 1e-12


def component_index(c):
    if isinstance(c, str):
        try:
            return "xyz".index(c.lower())
        except ValueError:
            raise ValueError(f"unknown component {c!r}") from None
    if c not in (0, 1, 2):
        raise ValueError(f"component must be 0, 1 or 2, got {c!r}")
    return int(c)


@dataclass(frozen=True)
class OperatorReport:
    name: str
    residual_norm: float
    reference_norm: float
    grid_resolution: tuple
    convergence_order: float | None = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def relative(self):
        return self.residual_norm / self.reference_norm if self.reference_norm else float("inf")

    def as_dict(self):
        return {
            "name": self.name,
            "residual_norm": self.residual_norm,
            "reference_norm": self.reference_norm,
            "relative_residual": self.relative,
            "grid_resolution": list(self.grid_resolution),
            "convergence_order": self.convergence_order,
            **self.details,
        }


def _spin(b, v):
    return np.einsum("mn,n...->m...", SPIN[b], v)


def _helicity(grid, v):
    r_hat = grid.unit_vectors[0]
    return sum(r_hat[a] * _spin(a, v) for a in range(3))


def _require_helicity(psi):
    if psi.helicity not in (-1, 1):
        raise ValueError("this check needs a state tagged with helicity +1 or -1")
    return psi.helicity


def _potential_on_grid(grid, gauge, psi_values, eps_string):
    """Cartesian a on the mesh; zero on nodes inside the string zone if psi vanishes there."""
    p, t, f = grid.mesh
    theta = grid.theta_nodes
    near = (theta < eps_string) | (theta > np.pi - eps_string)
    if np.any(near):
        amp = np.abs(psi_values) ** 2
        peak = amp.max()
        if peak > 0 and amp[:, :, near].max() > SUPPORT_THRESHOLD * peak:
            raise StringProximityError(theta[near][0], eps_string)
    a = np.zeros((3,) + grid.shape)
    ok = ~near
    a[:, :, ok] = gauge_potential_cartesian(gauge, p[:, ok], t[:, ok], f[:, ok], eps=0.0)
    return a


def gradient_p(psi):
    """Cartesian gradient of each mu-component; three wavefunctions (x, y, z)."""
    g = psi.grid.gradient(psi.values)
    return tuple(psi.with_values(g[c], helicity=None) for c in range(3))


def _pryce_values(psi, k):
    grid = psi.grid
    p = grid.mesh[0]
    r_hat = grid.unit_vectors[0]
    v = psi.values
    d_k = grid.gradient(v)[k]
    out = 1j * (d_k - psi.alpha * r_hat[k] / p * v)
    for a in range(3):
        for b in range(3):
            if LEVI[k, a, b]:
                out = out + LEVI[k, a, b] * r_hat[a] / p * _spin(b, v)
    return out


def apply_pryce(psi, component):
    k = component_index(component)
    return psi.with_values(_pryce_values(psi, k))


def apply_position(psi, gauge=ZERO_GAUGE, component=0, eps_string=EPS_STRING):
    k = component_index(component)
    a = _potential_on_grid(psi.grid, gauge, psi.values, eps_string)
    out = _pryce_values(psi, k) - a[k] * _helicity(psi.grid, psi.values)
    return psi.with_values(out)


def apply_J(psi, component):
    """Total angular momentum; the orbital part uses only angular derivatives."""
    k = component_index(component)
    grid = psi.grid
    _, t_hat, f_hat = grid.unit_vectors
    t = grid.mesh[1]
    v = psi.values
    orbital = -1j * (f_hat[k] * grid.partial_theta(v) - t_hat[k] / np.sin(t) * grid.partial_phi(v))
    return psi.with_values(orbital + _spin(k, v))


def apply_L_chi(psi, gauge=ZERO_GAUGE, component=0, eps_string=EPS_STRING):
    k = component_index(component)
    p = psi.grid.mesh[0]
    r_hat = psi.grid.unit_vectors[0]
    out = np.zeros_like(psi.values)
    for a in range(3):
        for b in range(3):
            if LEVI[k, a, b]:
                pb = psi.with_values(p * r_hat[b] * psi.values)
                out += LEVI[k, a, b] * apply_position(pb, gauge, a, eps_string).values
    return psi.with_values(out)


def spin_coefficient_field(grid, gauge):
    """s = a x p + p_hat on the mesh, shape (3, *grid.shape)."""
    p = grid.mesh[0]
    r_hat = grid.unit_vectors[0]
    a = _potential_on_grid(grid, gauge, None, 0.0)
    return p * np.cross(a, r_hat, axis=0) + r_hat


def apply_S_chi(psi, gauge=ZERO_GAUGE, component=0, eps_string=EPS_STRING):
    k = component_index(component)
    _potential_on_grid(psi.grid, gauge, psi.values, eps_string)
    s = spin_coefficient_field(psi.grid, gauge)
    return psi.with_values(s[k] * _helicity(psi.grid, psi.values))


def _s_at(gauge, q):
    p = np.linalg.norm(q, axis=0)
    theta = np.arccos(np.clip(q[2] / p, -1.0, 1.0))
    phi = np.arctan2(q[1], q[0])
    a = gauge_potential_cartesian(gauge, p, theta, phi, eps=0.0)
    r_hat = q / p
    return p * np.cross(a, r_hat, axis=0) + r_hat


def spin_coefficient_gradient(grid, gauge):
    """Closed-form d s_j / d p_k on the mesh, shape (3 j, 3 k, *grid.shape).

    With A = (cos + chi_phi) / sin and B = chi_theta, s = p_hat + A theta_hat
    - B phi_hat depends on direction only, so
    d_k s = (theta_hat_k d_theta s + phi_hat_k d_phi s / sin) / p.
    """
    p, t, f = grid.mesh
    r_hat, t_hat, f_hat = grid.unit_vectors
    st, ct = np.sin(t), np.cos(t)
    chi_t, chi_f = gauge.dchi(t, f)
    chi_tt, chi_tf, chi_ff = gauge.d2chi(t, f)
    a = (ct + chi_f) / st
    a_t = (chi_tf * st - 1.0 - chi_f * ct) / st**2
    a_f = chi_ff / st
    ds_t = (1.0 + a_t) * t_hat - a * r_hat - chi_tt * f_hat
    ds_f = ((st + a * ct - chi_tf) * f_hat + a_f * t_hat
            + chi_t * (st * r_hat + ct * t_hat))
    return (ds_t[:, None] * t_hat[None] + ds_f[:, None] * f_hat[None] / st) / p


def spin_coefficient_derivative(grid, gauge, j, k, rel_step=1e-5, method="analytic"):
    """d s_j / d p_k, closed form or (method="fd") by Cartesian central differences."""
    j, k = component_index(j), component_index(k)
    if method == "analytic":
        return spin_coefficient_gradient(grid, gauge)[j, k]
    if method != "fd":
        raise ValueError("method must be 'analytic' or 'fd'")
    p = grid.mesh[0]
    q = p * grid.unit_vectors[0]
    h = rel_step * p
    dq = np.zeros_like(q)
    dq[k] = h
    return (_s_at(gauge, q + dq)[j] - _s_at(gauge, q - dq)[j]) / (2 * h)


def _report(name, residual, psi, **details):
    return OperatorReport(
        name, psi.with_values(residual).norm(), psi.norm(), psi.grid.resolution, None, details
    )


def position_eigen_residual(psi, gauge=ZERO_GAUGE, eigenvalue=(0.0, 0.0, 0.0)):
    """sum_k || (r_k - r'_k) psi || relative to ||psi||, in quadrature."""
    res = []
    for k in range(3):
        out = apply_position(psi, gauge, k).values - eigenvalue[k] * psi.values
        res.append(out)
    return _report("position eigenrelation", np.sqrt(sum(np.abs(r) ** 2 for r in res)), psi)


def commutator_r_r(psi, gauge, j, k):
    j, k = component_index(j), component_index(k)
    rj_rk = apply_position(apply_position(psi, gauge, k), gauge, j).values
    rk_rj = apply_position(apply_position(psi, gauge, j), gauge, k).values
    return _report(f"[r_{'xyz'[j]}, r_{'xyz'[k]}]", rj_rk - rk_rj, psi)


def _j_r_commutator_values(psi, gauge, j, k):
    jr = apply_J(apply_position(psi, gauge, k), j).values
    rj = apply_position(apply_J(psi, j), gauge, k).values
    return jr - rj


def commutator_J_r(psi, gauge, j, k, form="contracted"):
    """Residual of ([J_j, r_k] - i eps_jkl r_l + i lam d s_j / d p_k) psi.

    form="printed" replaces r_l by r_k in the epsilon term, for comparison.
    The details record the norm of the gauge term on its own.
    """
    lam = _require_helicity(psi)
    j, k = component_index(j), component_index(k)
    comm = _j_r_commutator_values(psi, gauge, j, k)
    eps_term = np.zeros_like(comm)
    for l in range(3):
        if LEVI[j, k, l]:
            target = l if form == "contracted" else k
            eps_term += 1j * LEVI[j, k, l] * apply_position(psi, gauge, target).values
    ds = spin_coefficient_derivative(psi.grid, gauge, j, k)
    gauge_term = 1j * lam * ds * psi.values
    res = comm - eps_term + gauge_term
    return _report(
        f"[J_{'xyz'[j]}, r_{'xyz'[k]}] ({form})", res, psi,
        gauge_term_norm=psi.with_values(gauge_term).norm(),
        gauge_term_max=float(np.abs(ds).max()),
    )


@dataclass(frozen=True)
class UncertaintyResult:
    delta_J: float
    delta_r: float
    bound: float
    satisfied: bool
    direct_bound: float
    delta_J2: float
    bound_J2: float
    direct_bound_J2: float
    satisfied_J2: bool

    def __iter__(self):
        return iter((self.delta_J, self.delta_r, self.bound, self.satisfied))


def _spread(psi, out):
    n2 = psi.inner(psi).real
    mean = psi.inner(out) / n2
    second = out.inner(out).real / n2
    return float(np.sqrt(max(second - abs(mean) ** 2, 0.0))), mean


def uncertainty_check(psi, gauge, j, k, tol=1e-8, include_j2=True):
    """Robertson bounds for (J_j, r_k) and (J^2, r_k).

    ``bound`` is (1/2)|<i eps_jkl r_l - i lam d s_j / d p_k>|, which is the
    gauge-term bound when <r> = 0; ``direct_bound`` is (1/2)|<[J_j, r_k]>|
    from the operators themselves.  For J^2 the direct commutator is the
    reference; ``bound_J2`` is sum_j |<J_j (d s_j / d p_k) psi>|.  With
    ``include_j2=False`` the J^2 fields are NaN and ``satisfied_J2`` is True.
    """
    lam = _require_helicity(psi)
    j, k = component_index(j), component_index(k)
    n2 = psi.inner(psi).real
    jpsi = apply_J(psi, j)
    rpsi = apply_position(psi, gauge, k)
    delta_j, _ = _spread(psi, jpsi)
    delta_r, _ = _spread(psi, rpsi)
    pred = 0.0j
    for l in range(3):
        if LEVI[j, k, l]:
            pred += 1j * LEVI[j, k, l] * psi.inner(apply_position(psi, gauge, l)) / n2
    ds = spin_coefficient_derivative(psi.grid, gauge, j, k)
    pred -= 1j * lam * psi.inner(psi.with_values(ds * psi.values)) / n2
    bound = 0.5 * abs(pred)
    direct = 0.5 * abs(psi.inner(psi.with_values(_j_r_commutator_values(psi, gauge, j, k)))) / n2
    if not include_j2:
        nan = float("nan")
        return UncertaintyResult(delta_j, delta_r, bound, bool(delta_j * delta_r >= bound - tol),
                                 direct, nan, nan, nan, True)

    j2 = sum(apply_J(apply_J(psi, c), c).values for c in range(3))
    j2psi = psi.with_values(j2)
    delta_j2, _ = _spread(psi, j2psi)
    j2r = sum(apply_J(apply_J(rpsi, c), c).values for c in range(3))
    rj2 = apply_position(j2psi, gauge, k).values
    direct_j2 = 0.5 * abs(psi.inner(psi.with_values(j2r - rj2))) / n2
    bound_j2 = 0.0
    for c in range(3):
        dsc = spin_coefficient_derivative(psi.grid, gauge, c, k)
        bound_j2 += abs(psi.inner(apply_J(psi.with_values(dsc * psi.values), c))) / n2
    return UncertaintyResult(
        delta_j, delta_r, bound, bool(delta_j * delta_r >= bound - tol), direct,
        delta_j2, float(bound_j2), direct_j2, bool(delta_j2 * delta_r >= direct_j2 - tol),
    )


def _delta_chi(grid, gauge_from, gauge_to):
    _, t, f = grid.mesh
    d = gauge_to.chi(t[0], f[0]) - gauge_from.chi(t[0], f[0])
    dt_to, df_to = gauge_to.dchi(t[0], f[0])
    dt_from, df_from = gauge_from.dchi(t[0], f[0])
    return d, dt_to - dt_from, df_to - df_from


def gauge_covariance_check(psi, gauge_from, gauge_to, component, eps_string=EPS_STRING):
    """Residual of (T r T^-1 - r + lam grad(chi' - chi)) psi, T = exp(-i lam (chi' - chi)).

    r is the position operator of ``gauge_from``; the gradient of the gauge
    change is evaluated analytically (or from the spline for tables).
    """
    lam = _require_helicity(psi)
    k = component_index(component)
    grid = psi.grid
    p, t, _ = grid.mesh
    _, t_hat, f_hat = grid.unit_vectors
    d, d_t, d_f = _delta_chi(grid, gauge_from, gauge_to)
    phase = np.exp(-1j * lam * d)[None]
    inv = psi.with_values(psi.values / phase)
    conj = phase * apply_position(inv, gauge_from, k, eps_string).values
    plain = apply_position(psi, gauge_from, k, eps_string).values
    grad_k = t_hat[k] * d_t / p + f_hat[k] * d_f / (p * np.sin(t))
    res = conj - plain + lam * grad_k * psi.values
    return _report(f"gauge covariance r_{'xyz'[k]}", res, psi,
                   shift_norm=psi.with_values(lam * grad_k * psi.values).norm())


def gauge_transport_check(psi, gauge_from, gauge_to, component, eps_string=EPS_STRING):
    """Residual of r^(chi') (T psi) - T r^(chi) psi for a state given in gauge chi."""
    lam = _require_helicity(psi)
    k = component_index(component)
    d, _, _ = _delta_chi(psi.grid, gauge_from, gauge_to)
    phase = np.exp(-1j * lam * d)[None]
    lhs = apply_position(psi.with_values(phase * psi.values), gauge_to, k, eps_string).values
    rhs = phase * apply_position(psi, gauge_from, k, eps_string).values
    return _report(f"gauge transport r_{'xyz'[k]}", lhs - rhs, psi)


def helicity_leakage(psi, lam):
    """||(1 - P_lam) psi|| / ||psi|| with the pointwise helicity projector."""
    grid = psi.grid
    _, t, f = grid.mesh
    e = helicity_vector(lam, t, f)
    proj = e * np.sum(np.conj(e) * psi.values, axis=0)
    n = psi.norm()
    return psi.with_values(psi.values - proj).norm() / n if n else 0.0


def basis_state(grid, lam, gauge=ZERO_GAUGE, alpha=0.5, shift=None):
    """p^alpha e_lam in the given gauge, optionally times exp(-i shift . p)."""
    p, t, f = grid.mesh
    v = p**alpha * helicity_vector(lam, t, f, gauge)
    if shift is not None:
        q = p * grid.unit_vectors[0]
        v = v * np.exp(-1j * np.einsum("c,c...->...", np.asarray(shift, float), q))
    return VectorWavefunction(grid, v, alpha, lam, "basis state")


def default_sin_power(gauge):
    """Smallest power K for which sin(theta)^K e_lam^(chi) is a smooth vector field."""
    return abs(gauge.m) + 1 if gauge.is_axial else 2


def gaussian_state(grid, lam, gauge=ZERO_GAUGE, alpha=0.5, p_center=4.5, width=0.6,
                   angular="tilted", sin_power=None):
    """p^alpha exp(-(p - p_center)^2 / 2 width^2) sin(theta)^K g(p_hat) e_lam^(chi).

    The sin^K factor (default |m| + 1) cancels the phase singularity of the
    basis vectors on the strings, so the state is smooth both as a vector
    field and as a coefficient.  angular="axial" takes g = 1, which keeps the
    state symmetric about z; "tilted" takes g = 1 + 0.3 p_x/p + 0.2i p_y p_z/p^2.
    """
    p, t, f = grid.mesh
    k = default_sin_power(gauge) if sin_power is None else sin_power
    c = p**alpha * np.exp(-0.5 * ((p - p_center) / width) ** 2) * np.sin(t) ** k
    if angular == "tilted":
        r_hat = grid.unit_vectors[0]
        c = c * (1 + 0.3 * r_hat[0] + 0.2j * r_hat[1] * r_hat[2])
    elif angular != "axial":
        raise ValueError(f"unknown angular factor {angular!r}")
    v = c * helicity_vector(lam, t, f, gauge)
    psi = VectorWavefunction(grid, v, alpha, lam, f"gaussian {angular}")
    psi.warn_if_not_decayed()
    return psi


def convergence_order(coarse, fine, ratio=2.0):
    if coarse <= 0 or fine <= 0:
        return float("nan")
    return float(np.log(coarse / fine) / np.log(ratio))


def refinement_study(check, resolutions=(COARSE_RESOLUTION, FINE_RESOLUTION), p_min=0.25,
                     p_max=8.75, theta_scheme="trig3", p_spacing="uniform"):
    """Run ``check(grid) -> OperatorReport`` on each resolution.

    Returns the reports; every report after the first carries the observed
    order relative to its predecessor, assuming successive halving of h.
    """
    reports = []
    for n_p, n_t, n_f in resolutions:
        grid = MomentumGrid.build(n_p, n_t, n_f, p_min, p_max, theta_scheme, p_spacing)
        rep = check(grid)
        if reports:
            ratio = n_t / reports[-1].grid_resolution[1]
            rep = replace(rep, convergence_order=convergence_order(
                reports[-1].relative, rep.relative, ratio))
        reports.append(rep)
    return reports
