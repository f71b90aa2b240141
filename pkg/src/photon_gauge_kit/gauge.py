"""Helicity triads, geometric gauges and the momentum-space gauge potential.

Units hbar = c = 1.  A geometric gauge chi(theta, phi) rotates the transverse
pair about the momentum direction; the helicity vectors pick up the phase
exp(-i lam chi).  The potential

    a = phi_hat cos(theta) / (p sin(theta)) + grad chi

is singular on the z axis.  With chi = -m phi the loop integral around the
+z axis (counterclockwise, seen from +z) is 2 pi (1 - m) and around the -z
axis it is -2 pi (1 + m).  Off the axis, curl a = -p_hat / p^2: a monopole of
flux -4 pi whose flux is returned by the two strings (their outward fluxes
2 pi (1 - m) + 2 pi (1 + m) add up to 4 pi for every m).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .specfun import CART_TO_SPHERICAL, spin_matrices

__all__ = [
    "EPS_STRING",
    "StringProximityError",
    "GaugeSpec",
    "ZERO_GAUGE",
    "HelicityTriad",
    "GaugePotentialSample",
    "AngularMomentumDecomposition",
    "helicity_vector",
    "unit_vectors",
    "helicity_operator",
    "p_hat_spherical",
    "triad",
    "gauge_potential",
    "gauge_potential_cartesian",
    "string_flux",
    "monopole_curl_check",
    "sz_lz_decomposition",
    "basis_expectations",
    "gauge_transform_phase",
]

EPS_STRING = 1e-6

S1, S2, S3 = spin_matrices()
SPIN = np.array([S1, S2, S3])


class StringProximityError(ValueError):
    """Evaluation requested inside the exclusion zone around a Dirac string."""

    def __init__(self, theta, eps):
        self.theta = float(theta)
        self.eps = eps
        super().__init__(f"theta = {self.theta!r} lies within {eps:g} rad of a string axis")


@dataclass(frozen=True)
class GaugeSpec:
    """Geometric gauge function chi(theta, phi).

    Build with :meth:`zero`, :meth:`linear` (chi = -m phi) or
    :meth:`tabulated` / :meth:`from_csv`.  Tables are periodic in phi and are
    interpolated with bicubic splines; instances are immutable.
    """

    kind: str
    m: int = 0
    description: str = ""
    table: tuple | None = field(default=None, repr=False, compare=False)
    _spline: RectBivariateSpline | None = field(default=None, repr=False, compare=False)

    @classmethod
    def zero(cls):
        return cls("zero", 0, "chi = 0")

    @classmethod
    def linear(cls, m):
        m = int(m)
        return cls("linear", m, f"chi = -{m} phi" if m >= 0 else f"chi = {-m} phi")

    @classmethod
    def tabulated(cls, theta, phi, chi, description="tabulated"):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        chi = np.asarray(chi, dtype=float)
        if chi.shape != (theta.size, phi.size):
            raise ValueError(f"chi table shape {chi.shape} != ({theta.size}, {phi.size})")
        if theta.size < 4 or phi.size < 4:
            raise ValueError("gauge tables need at least 4 nodes in each direction")
        if np.any(np.diff(theta) <= 0) or theta[0] < 0 or theta[-1] > np.pi:
            raise ValueError("table theta must increase strictly within [0, pi]")
        dphi = np.diff(phi)
        if phi[0] != 0 or np.any(np.abs(dphi - 2 * np.pi / phi.size) > 1e-9):
            raise ValueError("table phi must be the uniform grid 2 pi k / N on [0, 2 pi)")
        if not np.all(np.isfinite(chi)):
            raise ValueError("gauge table contains non-finite values")
        # a full period on each side makes the spline periodic to rounding at the seam
        phi_ext = np.concatenate([phi - 2 * np.pi, phi, phi + 2 * np.pi])
        chi_ext = np.concatenate([chi, chi, chi], axis=1)
        spline = RectBivariateSpline(theta, phi_ext, chi_ext, kx=3, ky=3)
        return cls("tabulated", 0, description, (theta, phi, chi), spline)

    @classmethod
    def from_csv(cls, path, description=None):
        """Read columns theta, phi, chi (radians), rows ordered theta-major."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"theta", "phi", "chi"} - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                rows.append((float(row["theta"]), float(row["phi"]), float(row["chi"])))
        arr = np.array(rows)
        theta = np.unique(arr[:, 0])
        phi = np.unique(arr[:, 1])
        if arr.shape[0] != theta.size * phi.size:
            raise ValueError(f"{path}: rows do not form a full theta x phi grid")
        chi = arr[:, 2].reshape(theta.size, phi.size)
        if not (np.allclose(arr[:, 0].reshape(theta.size, phi.size), theta[:, None])
                and np.allclose(arr[:, 1].reshape(theta.size, phi.size), phi[None, :])):
            raise ValueError(f"{path}: rows must be ordered theta-major, then phi")
        return cls.tabulated(theta, phi, chi, description or f"table {Path(path).name}")

    def to_csv(self, path):
        if self.kind != "tabulated":
            raise ValueError("only tabulated gauges are written as tables")
        theta, phi, chi = self.table
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta", "phi", "chi"])
            for i, t in enumerate(theta):
                for j, f in enumerate(phi):
                    w.writerow([repr(float(t)), repr(float(f)), repr(float(chi[i, j]))])

    @property
    def is_axial(self):
        """True when chi = -m phi (strings only on the z axis)."""
        return self.kind in ("zero", "linear")

    def _eval_spline(self, theta, phi, dtheta=0, dphi=0):
        theta = np.asarray(theta, dtype=float)
        phi = np.mod(np.asarray(phi, dtype=float), 2 * np.pi)
        t_lo, t_hi = self.table[0][0], self.table[0][-1]
        if np.any(theta < t_lo - 1e-12) or np.any(theta > t_hi + 1e-12):
            raise ValueError(f"theta outside the tabulated range [{t_lo}, {t_hi}]")
        theta, phi = np.broadcast_arrays(np.clip(theta, t_lo, t_hi), phi)
        out = self._spline.ev(theta.ravel(), phi.ravel(), dx=dtheta, dy=dphi)
        return out.reshape(theta.shape)

    def chi(self, theta, phi):
        if self.kind == "tabulated":
            return self._eval_spline(theta, phi)
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        return -self.m * phi

    def dchi(self, theta, phi):
        """Angular partial derivatives (d chi / d theta, d chi / d phi)."""
        if self.kind == "tabulated":
            return self._eval_spline(theta, phi, 1, 0), self._eval_spline(theta, phi, 0, 1)
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        return np.zeros(theta.shape), np.full(theta.shape, -float(self.m))

    def d2chi(self, theta, phi):
        """Second partials (chi_theta_theta, chi_theta_phi, chi_phi_phi)."""
        if self.kind == "tabulated":
            return tuple(self._eval_spline(theta, phi, a, b) for a, b in ((2, 0), (1, 1), (0, 2)))
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        z = np.zeros(theta.shape)
        return z, z.copy(), z.copy()


ZERO_GAUGE = GaugeSpec.zero()


def _pole_phi(theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    at_pole = (theta == 0.0) | (theta == np.pi)
    return np.where(at_pole, 0.0, phi)


def unit_vectors(theta, phi):
    """Cartesian (p_hat, theta_hat, phi_hat), each with shape (3, ...)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, ct, sf, cf = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    p_hat = np.array([st * cf, st * sf, ct])
    t_hat = np.array([ct * cf, ct * sf, -st])
    f_hat = np.array([-sf, cf, np.zeros_like(theta)])
    return p_hat, t_hat, f_hat


def _to_spherical(v):
    return np.einsum("mc,c...->m...", CART_TO_SPHERICAL, v)


def helicity_vector(lam, theta, phi, gauge=ZERO_GAUGE):
    """mu-components of e_lam = (theta_hat + i lam phi_hat)/sqrt2 * exp(-i lam chi).

    At theta = 0 or pi the limit along phi = 0 is used.  Broadcasts over
    theta and phi; the component axis is first.
    """
    if lam not in (-1, 1):
        raise ValueError("helicity must be +1 or -1")
    phi = _pole_phi(theta, phi)
    theta = np.asarray(theta, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    ct, st = np.cos(theta), np.sin(theta)
    e = np.array([
        0.5 * (ct - lam) * np.exp(1j * phi),
        -st / np.sqrt(2) + 0j,
        0.5 * (ct + lam) * np.exp(-1j * phi),
    ])
    return e * np.exp(-1j * lam * gauge.chi(theta, phi))


def p_hat_spherical(theta, phi):
    phi = _pole_phi(theta, phi)
    return _to_spherical(unit_vectors(theta, phi)[0])


def helicity_operator(theta, phi):
    """The 3x3 matrix S . p_hat at the given direction."""
    p_hat = unit_vectors(theta, phi)[0]
    return np.einsum("k...,kab->...ab", p_hat, SPIN)


@dataclass(frozen=True)
class HelicityTriad:
    point: tuple
    e_minus: np.ndarray
    e_zero: np.ndarray
    e_plus: np.ndarray
    gauge: GaugeSpec

    def as_matrix(self):
        """Columns ordered lam = -1, 0, +1."""
        return np.column_stack([self.e_minus, self.e_zero, self.e_plus])


def triad(theta, phi, gauge=ZERO_GAUGE):
    if not 0.0 <= theta <= np.pi:
        raise ValueError("theta must lie in [0, pi]")
    return HelicityTriad(
        (float(theta), float(phi)),
        helicity_vector(-1, theta, phi, gauge),
        p_hat_spherical(theta, phi).astype(complex),
        helicity_vector(1, theta, phi, gauge),
        gauge,
    )


@dataclass(frozen=True)
class GaugePotentialSample:
    point: tuple
    vector: np.ndarray
    gauge: GaugeSpec

    @property
    def phi_component(self):
        _, _, f_hat = unit_vectors(self.point[1], self.point[2])
        return float(self.vector @ f_hat)

    @property
    def theta_component(self):
        _, t_hat, _ = unit_vectors(self.point[1], self.point[2])
        return float(self.vector @ t_hat)


def _check_string(theta, eps):
    theta = np.asarray(theta, dtype=float)
    near = (theta < eps) | (theta > np.pi - eps)
    if np.any(near):
        raise StringProximityError(theta[near].flat[0], eps)


def gauge_potential_cartesian(gauge, p, theta, phi, eps=EPS_STRING):
    """Cartesian a(p, theta, phi) with shape (3, ...)."""
    _check_string(theta, eps)
    p, theta, phi = np.broadcast_arrays(
        np.asarray(p, float), np.asarray(theta, float), np.asarray(phi, float)
    )
    _, t_hat, f_hat = unit_vectors(theta, phi)
    st, ct = np.sin(theta), np.cos(theta)
    d_theta, d_phi = gauge.dchi(theta, phi)
    a_phi = (ct + d_phi) / (p * st)
    a_theta = d_theta / p
    return f_hat * a_phi + t_hat * a_theta


def gauge_potential(gauge, p, theta, phi, eps=EPS_STRING):
    if p <= 0:
        raise ValueError("momentum magnitude must be positive")
    vec = gauge_potential_cartesian(gauge, p, theta, phi, eps)
    return GaugePotentialSample((float(p), float(theta), float(phi)), vec, gauge)


def _loop_integral(gauge, p, theta, n_phi=256):
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    a = gauge_potential_cartesian(gauge, p, np.full(n_phi, theta), phi, eps=0.0)
    _, _, f_hat = unit_vectors(theta, phi)
    # dl = phi_hat p sin(theta) dphi; trapezoid is spectral for periodic integrands
    return np.sum(np.einsum("c...,c...->...", a, f_hat)) * p * np.sin(theta) * 2 * np.pi / n_phi


def string_flux(gauge, p, pole, eps_values=(0.04, 0.02, 0.01)):
    """Flux of the string on one pole in units of 2 pi.

    The loop integral is taken counterclockwise about +z on circles at polar
    angle eps (north) or pi - eps (south) and extrapolated to eps -> 0 by a
    polynomial fit in eps^2.
    """
    if pole not in ("north", "south"):
        raise ValueError("pole must be 'north' or 'south'")
    eps = np.asarray(eps_values, dtype=float)
    thetas = eps if pole == "north" else np.pi - eps
    vals = np.array([_loop_integral(gauge, p, t) for t in thetas]) / (2 * np.pi)
    coeffs = np.polyfit(eps**2, vals, len(eps) - 1)
    return float(coeffs[-1])


def _potential_at_cartesian(gauge, q, eps):
    p = np.linalg.norm(q)
    theta = np.arccos(np.clip(q[2] / p, -1.0, 1.0))
    phi = np.arctan2(q[1], q[0])
    return gauge_potential_cartesian(gauge, p, theta, phi, eps)


def monopole_curl_check(gauge, p, theta, phi, step, eps=EPS_STRING):
    """Central-difference curl of a against the monopole field -p_hat / p^2.

    Returns (computed curl, expected field, relative error).
    """
    _check_string(theta, eps)
    p_hat, _, _ = unit_vectors(theta, phi)
    q0 = p * p_hat
    jac = np.zeros((3, 3))  # jac[i, j] = d a_i / d q_j
    for j in range(3):
        dq = np.zeros(3)
        dq[j] = step
        jac[:, j] = (_potential_at_cartesian(gauge, q0 + dq, eps)
                     - _potential_at_cartesian(gauge, q0 - dq, eps)) / (2 * step)
    curl = np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])
    expected = -p_hat / p**2
    rel = float(np.linalg.norm(curl - expected) / np.linalg.norm(expected))
    return curl, expected, rel


@dataclass(frozen=True)
class DecompositionRow:
    s_z: int
    l_z: int
    amplitude: complex
    probability: float


@dataclass(frozen=True)
class AngularMomentumDecomposition:
    """Rows for mu = -1, 0, +1 of e_lam in the gauge chi = -m phi."""

    m: int
    lam: int
    theta: float
    rows: tuple

    @property
    def probabilities(self):
        return np.array([r.probability for r in self.rows])


def sz_lz_decomposition(m, lam, theta):
    """S_z / L_z content of the basis vector e_lam^(-m phi).

    Row mu has S_z = mu and L_z = lam*m - mu.  The lam = -1 rows follow from
    e_{-1, mu} = conj(e_{+1, -mu}), so they carry j_z = -m.  Amplitudes are
    the theta-dependent factors at phi = 0.
    """
    if lam not in (-1, 1):
        raise ValueError("helicity must be +1 or -1")
    ct, st = np.cos(theta), np.sin(theta)
    plus = np.array([0.5 * (ct - 1), -st / np.sqrt(2), 0.5 * (ct + 1)], dtype=complex)
    amps = plus if lam == 1 else np.conj(plus[::-1])
    rows = tuple(
        DecompositionRow(mu, lam * m - mu, complex(a), float(abs(a) ** 2))
        for mu, a in zip((-1, 0, 1), amps)
    )
    return AngularMomentumDecomposition(int(m), lam, float(theta), rows)


def basis_expectations(m, lam, theta):
    """(<S_z>, <L_z>, j_z) from the weighted sums over the decomposition."""
    dec = sz_lz_decomposition(m, lam, theta)
    sz = sum(r.probability * r.s_z for r in dec.rows)
    lz = sum(r.probability * r.l_z for r in dec.rows)
    return float(sz), float(lz), float(sz + lz)


def gauge_transform_phase(gauge_from, gauge_to, lam, theta, phi):
    """T = exp(-i lam (chi' - chi)) so that e^(chi') = T e^(chi)."""
    phi = _pole_phi(theta, phi)
    d = gauge_to.chi(theta, phi) - gauge_from.chi(theta, phi)
    out = np.exp(-1j * lam * d)
    return out[()] if np.ndim(out) == 0 else out
