"""Momentum-space grids and three-component vector wavefunctions.

The grid is a tensor product of uniform p nodes, Gauss-Legendre nodes in
cos(theta) (so no node ever sits on the z axis) and uniform phi nodes.
Derivatives: 4th-order finite differences in p (one-sided near the ends),
3-point stencils in theta that are exact on span{1, cos, sin}, and the
discrete Fourier derivative in phi.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "ResolutionError",
    "BoundaryDecayWarning",
    "MomentumGrid",
    "VectorWavefunction",
    "fd_weights",
    "write_wavefunction",
    "read_wavefunction",
]

THETA_SCHEMES = ("trig3", "barycentric")
BOUNDARY_DECAY = 1e-10


class ResolutionError(ValueError):
    """Too few nodes for the requested derivative stencils."""


class BoundaryDecayWarning(UserWarning):
    """A wavefunction is not negligible at the ends of the p grid."""


def fd_weights(x0, x, order):
    """Finite-difference weights for the derivative of given order at x0.

    Fornberg's recursion on arbitrary nodes x.
    """
    n = len(x)
    c = np.zeros((order + 1, n))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c[order]


def _fd_matrix(x, width):
    n = len(x)
    d = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - width // 2, 0), n - width)
        d[i, lo:lo + width] = fd_weights(x[i], x[lo:lo + width], 1)
    return d


def _trig_matrix(theta):
    """3-point d/dtheta stencils exact for 1, cos(theta) and sin(theta)."""
    n = len(theta)
    d = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - 1, 0), n - 3)
        t = theta[lo:lo + 3]
        a = np.array([np.ones(3), np.cos(t), np.sin(t)])
        b = np.array([0.0, -np.sin(theta[i]), np.cos(theta[i])])
        d[i, lo:lo + 3] = np.linalg.solve(a, b)
    return d


def _barycentric_matrix(x):
    """Polynomial differentiation matrix on arbitrary distinct nodes."""
    n = len(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Tensor grid in (p, theta, phi); build with :meth:`build`."""

    p_nodes: np.ndarray
    p_weights: np.ndarray
    costheta_nodes: np.ndarray
    costheta_weights: np.ndarray
    phi_nodes: np.ndarray
    theta_scheme: str = "trig3"
    p_spacing: str = "uniform"

    @classmethod
    def build(cls, n_p=64, n_theta=48, n_phi=32, p_min=0.25, p_max=8.75, theta_scheme="trig3",
              p_spacing="uniform"):
        """Tensor grid; ``p_spacing="geometric"`` spaces p nodes uniformly in log p."""
        if n_phi < 8 or n_phi % 2:
            raise ResolutionError(f"n_phi must be even and >= 8, got {n_phi}")
        if n_theta < 8:
            raise ResolutionError(f"n_theta must be >= 8, got {n_theta}")
        if n_p < 5:
            raise ResolutionError(f"n_p must be >= 5 for the 4th-order p stencil, got {n_p}")
        if not 0 < p_min < p_max:
            raise ValueError("need 0 < p_min < p_max")
        if theta_scheme not in THETA_SCHEMES:
            raise ValueError(f"theta_scheme must be one of {THETA_SCHEMES}")
        if p_spacing == "uniform":
            p = np.linspace(p_min, p_max, n_p)
            wp = np.full(n_p, p[1] - p[0])
        elif p_spacing == "geometric":
            s = np.linspace(np.log(p_min), np.log(p_max), n_p)
            p = np.exp(s)
            wp = p * (s[1] - s[0])
        else:
            raise ValueError("p_spacing must be 'uniform' or 'geometric'")
        wp[[0, -1]] *= 0.5
        x, wx = np.polynomial.legendre.leggauss(n_theta)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        # descending cos(theta) so that theta increases with the index
        return cls(p, wp, x[::-1].copy(), wx[::-1].copy(), phi, theta_scheme, p_spacing)

    @property
    def shape(self):
        return (self.p_nodes.size, self.costheta_nodes.size, self.phi_nodes.size)

    @property
    def resolution(self):
        return self.shape

    @property
    def p_min(self):
        return float(self.p_nodes[0])

    @property
    def p_max(self):
        return float(self.p_nodes[-1])

    @cached_property
    def theta_nodes(self):
        return np.arccos(self.costheta_nodes)

    @cached_property
    def mesh(self):
        """Broadcast arrays (P, THETA, PHI) of shape grid.shape."""
        return np.meshgrid(self.p_nodes, self.theta_nodes, self.phi_nodes, indexing="ij")

    @cached_property
    def unit_vectors(self):
        """Cartesian (p_hat, theta_hat, phi_hat) on the mesh, each (3, *shape)."""
        _, t, f = self.mesh
        st, ct, sf, cf = np.sin(t), np.cos(t), np.sin(f), np.cos(f)
        return (
            np.array([st * cf, st * sf, ct]),
            np.array([ct * cf, ct * sf, -st]),
            np.array([-sf, cf, np.zeros_like(f)]),
        )

    @cached_property
    def d_p(self):
        return _fd_matrix(self.p_nodes, 5)

    @cached_property
    def d_theta(self):
        if self.theta_scheme == "trig3":
            return _trig_matrix(self.theta_nodes)
        x = self.costheta_nodes
        return -np.sqrt(1 - x**2)[:, None] * _barycentric_matrix(x)

    @cached_property
    def phi_wavenumbers(self):
        k = np.fft.fftfreq(self.phi_nodes.size, 1.0 / self.phi_nodes.size)
        k[self.phi_nodes.size // 2] = 0.0  # Nyquist mode has no odd derivative
        return k

    @cached_property
    def volume_weights(self):
        """d^3p quadrature weights p^2 w_p w_x dphi on the mesh."""
        w_angle = self.costheta_weights * (2 * np.pi / self.phi_nodes.size)
        return (self.p_nodes**2 * self.p_weights)[:, None, None] * w_angle[None, :, None] \
            * np.ones(self.shape)

    def sphere_integral(self, values):
        """Integral over the unit sphere of an array shaped (n_theta, n_phi)."""
        return float(np.sum(self.costheta_weights[:, None] * values)
                     * 2 * np.pi / self.phi_nodes.size)

    def partial_p(self, f):
        return np.einsum("ij,...jkl->...ikl", self.d_p, f)

    def partial_theta(self, f):
        return np.einsum("ij,...kjl->...kil", self.d_theta, f)

    def partial_phi(self, f):
        spec = np.fft.fft(f, axis=-1) * (1j * self.phi_wavenumbers)
        return np.fft.ifft(spec, axis=-1)

    def gradient(self, f):
        """Cartesian gradient of f(..., p, theta, phi); new leading axis of size 3."""
        p, t, _ = self.mesh
        r_hat, t_hat, f_hat = self.unit_vectors
        fp = self.partial_p(f)
        ft = self.partial_theta(f) / p
        ff = self.partial_phi(f) / (p * np.sin(t))
        return np.array([r_hat[c] * fp + t_hat[c] * ft + f_hat[c] * ff for c in range(3)])

    def header(self):
        return {
            "n_p": self.shape[0],
            "n_theta": self.shape[1],
            "n_phi": self.shape[2],
            "p_min": self.p_min,
            "p_max": self.p_max,
            "theta_scheme": self.theta_scheme,
            "p_spacing": self.p_spacing,
        }


@dataclass(frozen=True, eq=False)
class VectorWavefunction:
    """mu-components (-1, 0, +1) of psi on a grid, values shaped (3, *grid.shape).

    The inner product carries the weight p^(-2 alpha), under which the
    position operators are Hermitian.  ``helicity`` records the helicity
    subspace when the state was built inside one.
    """

    grid: MomentumGrid
    values: np.ndarray
    alpha: float = 0.5
    helicity: int | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (3,) + self.grid.shape:
            raise ValueError(f"values shape {v.shape} != {(3,) + self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("wavefunction has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, helicity="same"):
        hel = self.helicity if helicity == "same" else helicity
        return VectorWavefunction(self.grid, values, self.alpha, hel, self.label)

    @property
    def weights(self):
        return self.grid.volume_weights * (self.grid.p_nodes ** (-2 * self.alpha))[:, None, None]

    def inner(self, other):
        return complex(np.sum(self.weights * np.conj(self.values) * other.values))

    def norm(self):
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))

    def boundary_ratio(self):
        """Largest |psi| on the first/last p shell relative to the global max."""
        a = np.abs(self.values)
        peak = a.max()
        if peak == 0:
            return 0.0
        return float(max(a[:, 0].max(), a[:, -1].max()) / peak)

    def warn_if_not_decayed(self):
        ratio = self.boundary_ratio()
        if ratio > BOUNDARY_DECAY:
            warnings.warn(
                f"wavefunction reaches {ratio:.2e} of its peak at the p boundary; "
                "one-sided stencils there limit accuracy",
                BoundaryDecayWarning,
                stacklevel=3,
            )
        return ratio


WF_FORMAT = "photon-gauge-kit wavefunction v1"


def write_wavefunction(path, psi):
    """Plain-text dump: '# key = value' header, then rows ip itheta iphi mu re im.

    Rows run with ip slowest and mu fastest; mu is written as -1, 0, 1.
    """
    hdr = psi.grid.header()
    hdr["alpha"] = psi.alpha
    hdr["helicity"] = "none" if psi.helicity is None else psi.helicity
    v = psi.values
    with open(path, "w") as fh:
        fh.write(f"# {WF_FORMAT}\n")
        for key, val in hdr.items():
            fh.write(f"# {key} = {float(val)!r}\n" if isinstance(val, float) else f"# {key} = {val}\n")
        fh.write("# columns: ip itheta iphi mu re im\n")
        n_p, n_t, n_f = psi.grid.shape
        for ip in range(n_p):
            for it in range(n_t):
                for jf in range(n_f):
                    for m in range(3):
                        z = v[m, ip, it, jf]
                        fh.write(f"{ip} {it} {jf} {m - 1} {float(z.real)!r} {float(z.imag)!r}\n")


def read_wavefunction(path):
    meta = {}
    rows = []
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# {WF_FORMAT}":
            raise ValueError(f"{path}: not a wavefunction file (got {first!r})")
        for line in fh:
            if line.startswith("#"):
                if "=" in line:
                    key, val = line[1:].split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            if line.strip():
                rows.append(line.split())
    required = ("n_p", "n_theta", "n_phi", "p_min", "p_max", "theta_scheme", "p_spacing",
                "alpha", "helicity")
    missing = [k for k in required if k not in meta]
    if missing:
        raise ValueError(f"{path}: header lacks {missing}")
    grid = MomentumGrid.build(
        int(meta["n_p"]), int(meta["n_theta"]), int(meta["n_phi"]),
        float(meta["p_min"]), float(meta["p_max"]), meta["theta_scheme"], meta["p_spacing"],
    )
    values = np.zeros((3,) + grid.shape, dtype=complex)
    if len(rows) != values.size:
        raise ValueError(f"{path}: expected {values.size} rows, found {len(rows)}")
    arr = np.array(rows, dtype=float)
    idx = arr[:, :4].astype(int)
    values[idx[:, 3] + 1, idx[:, 0], idx[:, 1], idx[:, 2]] = arr[:, 4] + 1j * arr[:, 5]
    hel = None if meta["helicity"] == "none" else int(meta["helicity"])
    return VectorWavefunction(grid, values, float(meta["alpha"]), hel)
