"""Position-space fields of localized photon states and their vortex structure.

A state is psi(p) = f(p) g(theta) e_lam(theta, phi) in the gauge chi = -lam m phi,
so that every mu-component carries the azimuthal factor exp(i (m - mu) phi)
and the total z angular momentum is m.  Its angular part is expanded as

    sqrt(2 pi) g(theta) e_{lam,mu}(theta, 0) = sum_l c_{mu,l} Y_l^{m-mu}(theta, 0)

and the field (hbar = c = 1) is

    E_mu(r, t) = 1/(2 pi^2) sum_l i^l (c_{mu,l}/sqrt(2 pi)) Y_l^{m-mu}(vartheta, phi) R_l(r, t),
    R_l(r, t) = int_0^inf p^2 f(p) j_l(p r) exp(-i p t) dp.

Fields are scaled so that max |E| over the sample grid is 1 unless
``normalize=False``; the applied factor is kept on the result.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .gauge import GaugeSpec, gauge_transform_phase, helicity_vector
from .grid import MomentumGrid, VectorWavefunction
from .quadrature import ConvergenceError, adaptive_gk15, theta_rule
from .specfun import normalized_legendre, sph_bessel_orders

__all__ = [
    "TruncationError",
    "TruncationWarning",
    "ZeroOnContourError",
    "NoRingFoundError",
    "RadialSpectrum",
    "AngularWeight",
    "LocalizedStateSpec",
    "AngularCoefficients",
    "PositionField",
    "AnnularProfile",
    "PUBLISHED_COEFFICIENTS",
    "TAIL_TOLERANCE",
    "angular_coefficients",
    "radial_transform",
    "radial_transforms",
    "synthesize_field",
    "synthesize_in_gauge",
    "field_gauge_invariance",
    "vortex_winding",
    "winding_number",
    "axis_null_report",
    "azimuthal_purity",
    "annular_profile",
    "momentum_space_state",
    "momentum_space_jz",
    "write_field_csv",
    "write_json",
]

TAIL_TOLERANCE = 1e-8
L_MAX_CAP = 256
FIELD_PREFACTOR = 1.0 / (2 * np.pi**2)


class TruncationError(RuntimeError):
    """Angular expansion not converged at the allowed l_max."""


class TruncationWarning(UserWarning):
    pass


class ZeroOnContourError(ValueError):
    """The field nearly vanishes somewhere on the winding contour."""


class NoRingFoundError(ValueError):
    pass


@dataclass(frozen=True)
class RadialSpectrum:
    """Radial profile f(p).

    kinds: "exponential" exp(-p/p0); "power_law_cutoff" p^alpha exp(-p/p0);
    "tabulated" cubic spline through (p, f) pairs, zero past the last node.
    """

    kind: str
    p0: float = 1.0
    alpha: float = 0.0
    table: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def exponential(cls, p0=1.0):
        return cls("exponential", float(p0))

    @classmethod
    def power_law_cutoff(cls, alpha, p0=1.0):
        return cls("power_law_cutoff", float(p0), float(alpha))

    @classmethod
    def tabulated(cls, p, f):
        p = np.asarray(p, float)
        f = np.asarray(f, float)
        if p.ndim != 1 or p.shape != f.shape or p.size < 4:
            raise ValueError("tabulated spectrum needs matching 1-D arrays with >= 4 nodes")
        if np.any(np.diff(p) <= 0) or p[0] < 0:
            raise ValueError("tabulated p must increase from a non-negative start")
        if np.any(f < 0):
            raise ValueError("spectrum values must be non-negative")
        return cls("tabulated", float(p[-1]), 0.0, (p, f))

    def __post_init__(self):
        if self.kind not in ("exponential", "power_law_cutoff", "tabulated"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if not self.p0 > 0:
            raise ValueError("cutoff scale p0 must be positive")
        if self.kind == "power_law_cutoff" and self.alpha <= -3:
            raise ValueError("p^2 f(p) must be integrable at p = 0 (need alpha > -3)")

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "exponential":
            return np.exp(-p / self.p0)
        if self.kind == "power_law_cutoff":
            with np.errstate(divide="ignore"):
                return np.where(p > 0, p**self.alpha, 0.0 if self.alpha > 0 else np.inf) \
                    * np.exp(-p / self.p0)
        pt, ft = self.table
        spline = CubicSpline(pt, ft)
        inside = (p >= pt[0]) & (p <= pt[-1])
        return np.where(inside, spline(np.clip(p, pt[0], pt[-1])), 0.0)

    def cutoff(self, tol=1e-16):
        """P_max beyond which p^2 |f| stays below tol times its maximum."""
        if self.kind == "tabulated":
            return float(self.table[0][-1])
        k = 2 + self.alpha
        # p^k exp(-p/p0) decreases past p = k p0; step out geometrically
        p_peak = max(k * self.p0, self.p0)
        peak = p_peak**k * math.exp(-p_peak / self.p0)
        p = p_peak
        while p**k * math.exp(-p / self.p0) > tol * peak:
            p *= 1.25
        return p

    def describe(self):
        if self.kind == "tabulated":
            return {"kind": "tabulated", "nodes": int(self.table[0].size)}
        out = {"kind": self.kind, "p0": self.p0}
        if self.kind == "power_law_cutoff":
            out["alpha"] = self.alpha
        return out


@dataclass(frozen=True)
class AngularWeight:
    """g(theta): "one", "sin_theta", "sin_power" (sin^k) or "tabulated"."""

    kind: str
    power: int = 0
    table: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def one(cls):
        return cls("one")

    @classmethod
    def sin_theta(cls):
        return cls("sin_theta", 1)

    @classmethod
    def sin_power(cls, k):
        if k < 0:
            raise ValueError("power must be non-negative")
        return cls("sin_power", int(k))

    @classmethod
    def tabulated(cls, theta, g):
        theta = np.asarray(theta, float)
        g = np.asarray(g, float)
        if theta.shape != g.shape or theta.size < 4:
            raise ValueError("tabulated weight needs matching arrays with >= 4 nodes")
        if abs(theta[0]) > 1e-12 or abs(theta[-1] - np.pi) > 1e-12 or np.any(np.diff(theta) <= 0):
            raise ValueError("tabulated weight must span [0, pi] with increasing theta")
        if not np.all(np.isfinite(g)):
            raise ValueError("weight must be bounded")
        return cls("tabulated", 0, (theta, g))

    def __post_init__(self):
        if self.kind not in ("one", "sin_theta", "sin_power", "tabulated"):
            raise ValueError(f"unknown angular weight {self.kind!r}")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "one":
            return np.ones_like(theta)
        if self.kind in ("sin_theta", "sin_power"):
            return np.sin(theta) ** self.power
        t, g = self.table
        return CubicSpline(t, g)(theta)

    def describe(self):
        out = {"kind": self.kind}
        if self.kind == "sin_power":
            out["power"] = self.power
        return out


@dataclass(frozen=True)
class LocalizedStateSpec:
    """(m, lam, alpha, f, g); lam = 0 stands for the sum of both helicities."""

    m: int
    lam: int
    radial: RadialSpectrum
    angular: AngularWeight
    alpha: float = 0.5
    normalization: float = 1.0

    def __post_init__(self):
        if self.lam not in (-1, 0, 1):
            raise ValueError("lam must be +1, -1 or 0 (both)")
        p_max = self.radial.cutoff(1e-12)
        rule = np.linspace(1e-9, p_max, 4001)
        dens = rule**2 * np.abs(self.radial(rule)) ** 2
        total = np.trapezoid(dens, rule)
        if not (np.isfinite(total) and total > 0):
            raise ValueError("radial spectrum is not square integrable with weight p^2")
        tail_start = rule[int(0.9 * rule.size)]
        tail = np.trapezoid(dens[rule >= tail_start], rule[rule >= tail_start])
        if tail / total >= 1e-10 and self.radial.kind != "tabulated":
            raise ValueError("radial spectrum does not decay fast enough")

    @property
    def helicities(self):
        return (1, -1) if self.lam == 0 else (self.lam,)

    def gauge(self, lam=None):
        """The gauge chi = -lam m phi in which e_{lam,mu} carries exp(i (m - mu) phi)."""
        lam = self.lam if lam is None else lam
        return GaugeSpec.linear(lam * self.m)

    def describe(self):
        return {
            "m": self.m,
            "lam": self.lam,
            "alpha": self.alpha,
            "normalization": self.normalization,
            "radial": self.radial.describe(),
            "angular": self.angular.describe(),
        }


# Printed values for lam = +1 alongside the harmonic they multiply, keyed by
# (m, angular kind, mu).  They differ from the orthonormal coefficients by a
# convention factor; compare patterns, and ratios through PUBLISHED_RATIOS.
PUBLISHED_COEFFICIENTS = {
    (1, "one", 0): {1: 4 / np.sqrt(6)},
    (1, "one", 1): {0: 4 / np.sqrt(3), 1: 2 / np.sqrt(6)},
    (0, "sin_theta", 0): {0: 4 / np.sqrt(3), 2: -10 / np.sqrt(8)},
}


@dataclass(frozen=True)
class AngularCoefficients:
    mu: int
    n: int
    entries: tuple
    l_max: int
    tail_estimate: float

    def values(self):
        return np.array([c for _, c in self.entries])

    def degrees(self):
        return np.array([l for l, _ in self.entries])

    def nonzero_degrees(self, rel=1e-10):
        v = np.abs(self.values())
        if v.max() == 0:
            return []
        return [int(l) for l, a in zip(self.degrees(), v) if a > rel * v.max()]

    def full_projection(self):
        """c / sqrt(2 pi): coefficients of the full angular function in Y_l^n(theta, phi)."""
        return self.values() / np.sqrt(2 * np.pi)

    def as_dict(self):
        return {
            "mu": self.mu,
            "n": self.n,
            "l_max": self.l_max,
            "tail_estimate": self.tail_estimate,
            "entries": [[int(l), float(c.real), float(c.imag)] for l, c in self.entries],
        }


def _coefficients_at(spec, lam, mu, l_max, n_quad=None):
    n = spec.m - mu
    if l_max < abs(n):
        raise ValueError(f"l_max = {l_max} is below |m - mu| = {abs(n)}")
    n_quad = n_quad or max(2 * l_max + 64, 128)
    theta, w = theta_rule(n_quad)
    e_mu = helicity_vector(lam, theta, np.zeros_like(theta))[mu + 1]
    # in the gauge chi = -lam m phi the phase exp(-i lam chi) is 1 at phi = 0
    integrand = np.sqrt(2 * np.pi) * spec.angular(theta) * e_mu
    ylm = normalized_legendre(l_max, n, np.cos(theta))
    c = 2 * np.pi * (ylm * integrand[None, :]) @ w
    ls = range(abs(n), l_max + 1)
    entries = tuple((l, complex(c[l])) for l in ls)
    vals = np.abs([c[l] for l in ls])
    peak = vals.max()
    # parity can zero alternate degrees, so look at the last two
    tail = float(vals[-2:].max() / peak) if peak > 0 else 0.0
    return AngularCoefficients(mu, n, entries, l_max, tail)


def angular_coefficients(spec, mu, l_max=None, lam=None, strict=True):
    """c_{mu,l} for l = |m - mu| .. l_max by theta quadrature.

    With l_max=None the degree starts at |m - mu| + 16 and doubles until the
    tail estimate drops below 1e-8 (cap 256).  An explicit l_max is used as
    given.  An unconverged expansion raises TruncationError when strict,
    otherwise warns.
    """
    if mu not in (-1, 0, 1):
        raise ValueError("mu must be -1, 0 or 1")
    lam = spec.helicities[0] if lam is None else lam
    if l_max is None:
        l_max = abs(spec.m - mu) + 16
        coeffs = _coefficients_at(spec, lam, mu, l_max)
        while coeffs.tail_estimate >= TAIL_TOLERANCE and l_max < L_MAX_CAP:
            l_max = min(2 * l_max, L_MAX_CAP)
            coeffs = _coefficients_at(spec, lam, mu, l_max)
    else:
        coeffs = _coefficients_at(spec, lam, mu, l_max)
    if coeffs.tail_estimate >= TAIL_TOLERANCE:
        msg = (f"angular expansion for mu={mu} not converged at l_max={coeffs.l_max}: "
               f"tail estimate {coeffs.tail_estimate:.3e} >= {TAIL_TOLERANCE:g}")
        if strict:
            raise TruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return coeffs


@lru_cache(maxsize=64)
def _integrand_scale(radial):
    """int p^2 |f| dp, the magnitude against which absolute errors are judged."""
    return float(adaptive_gk15(lambda p: p**2 * np.abs(radial(p)), 0.0, radial.cutoff(),
                               0.0, 1e-10).value)


def radial_transforms(radial, l_max, r, t=0.0, abs_tol=None, rel_tol=1e-13):
    """R_l(r, t) for l = 0..l_max at one radius, from a shared adaptive rule.

    The integration range [0, P_max] is cut where p^2 |f| falls below 1e-16
    of its maximum, and pre-split into half-periods pi / (r + |t|) of the
    oscillating factor.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    p_max = radial.cutoff()
    omega = r + abs(t)
    breaks = None
    if omega > 0:
        step = np.pi / omega
        breaks = np.arange(step, p_max, step)[:4000]

    def integrand(p):
        jl = sph_bessel_orders(l_max, p * r)
        return p**2 * radial(p) * jl * np.exp(-1j * p * t)

    if abs_tol is None:
        abs_tol = 1e-17 * _integrand_scale(radial)
    try:
        res = adaptive_gk15(integrand, 0.0, p_max, abs_tol, rel_tol, breaks)
    except ConvergenceError as exc:
        raise ConvergenceError(f"radial transform at r={r}, t={t}", exc.value, exc.error) from exc
    return np.asarray(res.value, dtype=complex)


def radial_transform(radial, l, r, t=0.0):
    """R_l(r, t) = int p^2 f(p) j_l(p r) exp(-i p t) dp."""
    if l < 0:
        raise ValueError("l must be non-negative")
    if r == 0 and l > 0:
        return 0j
    return complex(radial_transforms(radial, l, r, t)[l])


@dataclass(frozen=True, eq=False)
class PositionField:
    """E_mu sampled on (r, vartheta, phi) at time t; samples shaped (3, Nr, Nt, Nf)."""

    r: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    t: float
    samples: np.ndarray
    spec: LocalizedStateSpec | None
    scale: float = 1.0
    coefficients: dict = field(default_factory=dict)

    @property
    def intensity(self):
        return np.sum(np.abs(self.samples) ** 2, axis=0)

    def component(self, mu):
        return self.samples[mu + 1]

    def l2_norm(self):
        """Grid L2 norm with r^2 dr sin(theta) dtheta dphi trapezoid weights."""
        def trap(x):
            if x.size < 2:
                return np.ones(1)
            w = np.zeros_like(x)
            d = np.diff(x)
            w[:-1] += 0.5 * d
            w[1:] += 0.5 * d
            return w
        wr = trap(self.r) * self.r**2
        wt = trap(self.theta) * np.sin(self.theta)
        wf = np.full(self.phi.size, 2 * np.pi / self.phi.size)
        w = wr[:, None, None] * wt[None, :, None] * wf[None, None, :]
        return float(np.sqrt(np.sum(w * self.intensity)))


def _field_from_projection(proj, r, theta, phi, t, radial, max_l):
    """Assemble E_mu from {(mu, n): array over l = 0..max_l of full-projection coefficients}."""
    x = np.cos(theta)
    rad = np.array([radial_transforms(radial, max_l, ri, t) for ri in r])  # (Nr, L+1)
    il = 1j ** np.arange(max_l + 1)
    out = np.zeros((3, r.size, theta.size, phi.size), dtype=complex)
    for (mu, n), coef in proj.items():
        if abs(n) > max_l:
            continue
        leg = normalized_legendre(max_l, n, x)  # (L+1, Nt)
        weighted = (il * coef)[None, :] * rad  # (Nr, L+1)
        radial_angular = weighted @ leg  # (Nr, Nt)
        out[mu + 1] += FIELD_PREFACTOR * radial_angular[:, :, None] * np.exp(1j * n * phi)[None, None, :]
    return out


def synthesize_field(spec, r, theta, phi, t=0.0, l_max=None, normalize=True, strict=True):
    """Field of ``spec`` on the tensor grid r x vartheta x phi (radians)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    proj = {}
    coeffs = {}
    for lam in spec.helicities:
        for mu in (-1, 0, 1):
            c = angular_coefficients(spec, mu, l_max, lam, strict)
            coeffs[(lam, mu)] = c
            full = np.zeros(c.l_max + 1, dtype=complex)
            full[c.degrees()] = c.full_projection()
            key = (mu, c.n)
            prev = proj.get(key)
            if prev is not None:
                size = max(prev.size, full.size)
                prev = np.pad(prev, (0, size - prev.size))
                full = np.pad(full, (0, size - full.size)) + prev
            proj[key] = full
    max_l = max(v.size for v in proj.values()) - 1
    proj = {k: np.pad(v, (0, max_l + 1 - v.size)) for k, v in proj.items()}
    samples = spec.normalization * _field_from_projection(proj, r, theta, phi, t, spec.radial, max_l)
    scale = 1.0
    if normalize:
        peak = np.sqrt(np.sum(np.abs(samples) ** 2, axis=0)).max()
        if peak > 0:
            scale = 1.0 / peak
            samples = samples * scale
    return PositionField(r, theta, phi, float(t), samples, spec, scale, coeffs)


def _project_sphere(values, n_theta, n_phi, l_max):
    """Expand values[mu, theta_j, phi_k] on a theta_rule x uniform-phi grid in Y_l^n."""
    theta, w = theta_rule(n_theta)
    modes = np.fft.fft(values, axis=-1) / n_phi  # coefficient of exp(i n phi)
    ns = np.fft.fftfreq(n_phi, 1.0 / n_phi).astype(int)
    x = np.cos(theta)
    proj = {}
    for mu in (-1, 0, 1):
        for col, n in enumerate(ns):
            if abs(n) > l_max or abs(n) >= n_phi // 2:
                continue
            leg = normalized_legendre(l_max, n, x)
            # int Y* f dOmega = 2 pi int Y_l^n(theta,0) f_n(theta) dcos(theta)
            coef = 2 * np.pi * (leg * modes[mu + 1, :, col][None, :]) @ w
            proj[(mu, int(n))] = coef
    return proj


def synthesize_in_gauge(spec, gauge, coefficient, r, theta, phi, t=0.0, l_max=48,
                        n_theta=128, n_phi=32, lam=None):
    """Field of f(p) C(theta, phi) e_lam^(gauge) through a full spherical projection.

    ``coefficient`` maps (theta, phi) arrays to the scalar coefficient C.
    No normalization is applied.
    """
    lam = spec.helicities[0] if lam is None else lam
    tq, _ = theta_rule(n_theta)
    fq = 2 * np.pi * np.arange(n_phi) / n_phi
    tt, ff = np.meshgrid(tq, fq, indexing="ij")
    values = coefficient(tt, ff)[None] * helicity_vector(lam, tt, ff, gauge)
    proj = _project_sphere(values, n_theta, n_phi, l_max)
    r = np.atleast_1d(np.asarray(r, float))
    theta = np.atleast_1d(np.asarray(theta, float))
    phi = np.atleast_1d(np.asarray(phi, float))
    samples = _field_from_projection(proj, r, theta, phi, t, spec.radial, l_max)
    return PositionField(r, theta, phi, float(t), samples, spec)


def field_gauge_invariance(spec, gauge_a, gauge_b, r, theta, phi, t=0.0, compensate=True,
                           l_max=48, n_theta=128, n_phi=32):
    """Relative L2 difference of one state synthesized through two gauges.

    The state is g(theta) e_lam in the spec's own gauge.  In gauge X its
    coefficient is g / T(spec gauge -> X); with compensate=False the
    gauge-B run reuses the gauge-A coefficient, which describes a different
    photon and serves as a negative control.
    """
    lam = spec.helicities[0]
    home = spec.gauge(lam)

    def coefficient_in(gauge):
        return lambda tt, ff: spec.angular(tt) / gauge_transform_phase(home, gauge, lam, tt, ff)

    coef_a = coefficient_in(gauge_a)
    coef_b = coefficient_in(gauge_b) if compensate else coef_a
    fa = synthesize_in_gauge(spec, gauge_a, coef_a, r, theta, phi, t, l_max, n_theta, n_phi, lam)
    fb = synthesize_in_gauge(spec, gauge_b, coef_b, r, theta, phi, t, l_max, n_theta, n_phi, lam)
    diff = np.sqrt(np.sum(np.abs(fa.samples - fb.samples) ** 2))
    ref = np.sqrt(np.sum(np.abs(fa.samples) ** 2))
    return float(diff / ref)


def winding_number(values):
    """Net phase winding of samples taken counterclockwise around a closed loop."""
    v = np.asarray(values, dtype=complex)
    steps = np.angle(np.roll(v, -1) / v)
    return int(round(math.fsum(steps) / (2 * np.pi)))


def vortex_winding(field, mu, circle, threshold=1e-10):
    """Winding of E_mu along phi at the sampled (r, vartheta) = circle."""
    r0, t0 = circle
    ir = np.flatnonzero(np.isclose(field.r, r0))
    it = np.flatnonzero(np.isclose(field.theta, t0))
    if ir.size == 0 or it.size == 0:
        raise ValueError(f"circle {circle} is not on the sample grid")
    comp = field.component(mu)
    n = field.spec.m - mu if field.spec is not None else None
    if n is not None and field.phi.size <= 2 * abs(n):
        raise ValueError("too few phi samples to resolve the winding")
    loop = comp[ir[0], it[0], :]
    peak = np.abs(comp).max()
    if peak == 0 or np.abs(loop).min() <= threshold * peak:
        raise ZeroOnContourError(
            f"|E_{mu}| on the contour falls to {np.abs(loop).min():.3e} (peak {peak:.3e})")
    return winding_number(loop)


def axis_null_report(field):
    """Per mu: largest |E_mu| on the sampled axis points divided by its peak."""
    on_axis = np.isclose(field.theta, 0.0) | np.isclose(field.theta, np.pi)
    out = {}
    for mu in (-1, 0, 1):
        comp = np.abs(field.component(mu))
        peak = comp.max()
        axis_max = comp[:, on_axis, :].max() if np.any(on_axis) else float("nan")
        n = field.spec.m - mu if field.spec is not None else None
        out[mu] = {"n": n, "axis_max": float(axis_max), "peak": float(peak),
                   "ratio": float(axis_max / peak) if peak else 0.0}
    return out


def azimuthal_purity(field, mu):
    """Largest off-mode DFT amplitude in phi relative to the expected mode m - mu."""
    comp = field.component(mu)
    nf = field.phi.size
    spec_f = np.fft.fft(comp, axis=-1) / nf
    ns = np.fft.fftfreq(nf, 1.0 / nf).astype(int)
    target = (field.spec.m - mu) % nf
    main = np.abs(spec_f[..., target]).max()
    others = np.abs(np.delete(spec_f, target, axis=-1)).max()
    return float(others / main) if main else float("inf"), int(ns[target])


@dataclass(frozen=True)
class AnnularProfile:
    peak_radius: float
    r: np.ndarray
    intensity: np.ndarray
    components: tuple


def annular_profile(spec, r, t=0.0, l_max=None):
    """Ring scan at vartheta = pi/2: first off-axis maximum of sum |E_mu|^2 over m - mu != 0."""
    comps = tuple(mu for mu in (-1, 0, 1) if spec.m - mu != 0)
    if not comps:
        raise NoRingFoundError("all components have m - mu = 0")
    r = np.asarray(r, dtype=float)
    fld = synthesize_field(spec, r, np.array([np.pi / 2]), np.array([0.0]), t, l_max,
                           normalize=False)
    inten = sum(np.abs(fld.component(mu)[:, 0, 0]) ** 2 for mu in comps)
    peak = inten.max()
    inten = inten / peak if peak > 0 else inten
    interior = np.flatnonzero((inten[1:-1] >= inten[:-2]) & (inten[1:-1] > inten[2:])) + 1
    interior = [i for i in interior if r[i] > 0]
    if not interior:
        raise NoRingFoundError("no interior intensity maximum on the scanned radii")
    i = interior[0]
    y0, y1, y2 = inten[i - 1], inten[i], inten[i + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    # parabola through three points on a possibly non-uniform grid
    if not np.isclose(r[i + 1] - r[i], r[i] - r[i - 1]):
        coef = np.polyfit(r[i - 1:i + 2], [y0, y1, y2], 2)
        peak_r = -coef[1] / (2 * coef[0])
    else:
        peak_r = r[i] + shift * (r[i] - r[i - 1])
    return AnnularProfile(float(peak_r), r, inten, comps)


def momentum_space_state(spec, grid, lam=None):
    """psi = f(p) g(theta) e_lam in the spec gauge, as a grid wavefunction."""
    lam = spec.helicities[0] if lam is None else lam
    p, t, f = grid.mesh
    v = spec.radial(p) * spec.angular(t) * helicity_vector(lam, t, f, spec.gauge(lam))
    return VectorWavefunction(grid, v, spec.alpha, lam, "localized state")


def momentum_space_jz(spec, grid=None):
    """<J_z> of the spec's momentum-space state (expected: m)."""
    from .operators import apply_J

    grid = grid or MomentumGrid.build(16, 24, 16, 0.05, spec.radial.cutoff(1e-12))
    psi = momentum_space_state(spec, grid)
    return float((psi.inner(apply_J(psi, 2)) / psi.inner(psi)).real)


def write_field_csv(path, fld):
    """Rows r, theta, phi, t, mu, re, im, abs2 with r slowest and mu fastest."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "theta", "phi", "t", "mu", "re", "im", "abs2"])
        for i, r in enumerate(fld.r):
            for j, th in enumerate(fld.theta):
                for k, ph in enumerate(fld.phi):
                    for mu in (-1, 0, 1):
                        z = fld.samples[mu + 1, i, j, k]
                        w.writerow([f"{r:.12g}", f"{th:.12g}", f"{ph:.12g}", f"{fld.t:.12g}", mu,
                                    f"{z.real:.15e}", f"{z.imag:.15e}", f"{abs(z) ** 2:.15e}"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
