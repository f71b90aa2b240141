"""Special functions used throughout the toolkit.

Associated Legendre functions (Condon-Shortley phase), orthonormal spherical
harmonics, spherical Bessel functions, and spin-1 matrices together with the
Euler rotation built from them.  Vector components are always listed in the
spherical order mu = -1, 0, +1, i.e. as coefficients on the complex unit
vectors (x - iy)/sqrt2, z, (x + iy)/sqrt2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "SphericalHarmonicIndex",
    "assoc_legendre",
    "normalized_legendre",
    "sph_harm",
    "sph_bessel",
    "sph_bessel_orders",
    "spin_matrices",
    "rotation_matrix",
    "spin_exp",
    "CART_TO_SPHERICAL",
    "SPHERICAL_TO_CART",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


# columns are the mu = -1, 0, +1 unit vectors expressed in x, y, z
SPHERICAL_TO_CART = np.array(
    [
        [1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)],
        [-1j / np.sqrt(2), 0.0, 1j / np.sqrt(2)],
        [0.0, 1.0, 0.0],
    ],
    dtype=complex,
)
CART_TO_SPHERICAL = SPHERICAL_TO_CART.conj().T


@dataclass(frozen=True)
class SphericalHarmonicIndex:
    l: int
    n: int

    def __post_init__(self):
        if self.l < 0 or abs(self.n) > self.l:
            raise DomainError(f"invalid harmonic index l={self.l}, n={self.n}")


def _check_ln(l, n):
    if l < 0 or abs(n) > l:
        raise DomainError(f"need 0 <= |n| <= l, got l={l}, n={n}")


def _check_x(x):
    if np.any(np.abs(x) > 1.0):
        raise DomainError("|x| must not exceed 1")


def assoc_legendre(l, n, x):
    """P_l^n(x) with the Condon-Shortley phase.

    Upward recurrence in l starting from the diagonal P_n^n.  Negative
    orders use P_l^{-n} = (-1)^n (l-n)!/(l+n)! P_l^n.
    """
    _check_ln(l, n)
    x = np.asarray(x, dtype=float)
    _check_x(x)
    m = abs(n)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.ones_like(x)
    for k in range(1, m + 1):
        pmm = -pmm * (2 * k - 1) * s
    if l == m:
        out = pmm
    else:
        p_prev, p_cur = pmm, x * (2 * m + 1) * pmm
        for k in range(m + 2, l + 1):
            p_prev, p_cur = p_cur, ((2 * k - 1) * x * p_cur - (k + m - 1) * p_prev) / (k - m)
        out = p_cur
    if n < 0:
        ratio = 1.0
        for k in range(l - m + 1, l + m + 1):
            ratio /= k
        out = (-1) ** m * ratio * out
    return out[()] if out.ndim == 0 else out


def normalized_legendre(l_max, n, x):
    """Rows l = 0..l_max of Y_l^n(theta, 0) evaluated at x = cos(theta).

    Rows with l < |n| are zero.  The normalized recurrence avoids the
    overflow of the bare double factorials, so l_max in the hundreds is fine.
    """
    if l_max < 0:
        raise DomainError("l_max must be non-negative")
    x = np.asarray(x, dtype=float)
    _check_x(x)
    m = abs(n)
    out = np.zeros((l_max + 1,) + x.shape)
    if m > l_max:
        return out
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    # Y_m^m = (-1)^m sqrt((2m+1)/4pi * prod (2k-1)/(2k)) sin^m
    c = 1.0 / (4 * np.pi)
    ymm = np.full(x.shape, np.sqrt(c))
    for k in range(1, m + 1):
        ymm = -ymm * np.sqrt((2 * k + 1) / (2 * k)) * s
    out[m] = ymm
    if m + 1 <= l_max:
        out[m + 1] = np.sqrt(2 * m + 3) * x * ymm
    for l in range(m + 2, l_max + 1):
        a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = np.sqrt(((l - 1) ** 2 - m * m) * (2 * l + 1) / ((2 * l - 3) * (l * l - m * m)))
        out[l] = a * x * out[l - 1] - b * out[l - 2]
    if n < 0 and m % 2 == 1:
        out = -out
    return out


def sph_harm(l, n, theta, phi):
    """Orthonormal Y_l^n(theta, phi), Condon-Shortley phase."""
    _check_ln(l, n)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    leg = normalized_legendre(l, n, np.cos(theta))[l]
    out = leg * np.exp(1j * n * phi)
    return out[()] if np.ndim(out) == 0 else out


_RESCALE = 1e100


def sph_bessel_orders(l_max, x):
    """j_0(x) .. j_{l_max}(x) stacked along a new leading axis.

    Points with x >= l_max use upward recurrence from the closed forms of
    j_0 and j_1.  Points with 1e-3 <= x < l_max use Miller's downward
    recurrence, normalized with the sum rule  sum_k (2k+1) j_k(x)^2 = 1.
    Below 1e-3 a three-term power series is exact to rounding.
    """
    if l_max < 0:
        raise DomainError("l_max must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("spherical Bessel argument must be non-negative")
    shape = x.shape
    x = x.ravel()
    out = np.zeros((l_max + 1, x.size))
    out[0, x == 0] = 1.0

    # x^l / (2l+1)!! (1 - x^2/(2(2l+3)) + x^4/(8(2l+3)(2l+5))), next term O(x^6)
    tiny = (x > 0) & (x < 1e-3)
    if np.any(tiny):
        xt = x[tiny]
        lead = np.ones_like(xt)
        for k in range(l_max + 1):
            if k > 0:
                lead = lead * xt / (2 * k + 1)
            x2 = xt * xt
            out[k, tiny] = lead * (1 - x2 / (2 * (2 * k + 3)) + x2 * x2 / (8 * (2 * k + 3) * (2 * k + 5)))

    up = x >= max(l_max, 1e-3)
    if np.any(up):
        xu = x[up]
        sx, cx = np.sin(xu), np.cos(xu)
        out[0, up] = sx / xu
        if l_max >= 1:
            out[1, up] = sx / xu**2 - cx / xu
        for k in range(1, l_max):
            out[k + 1, up] = (2 * k + 1) / xu * out[k, up] - out[k - 1, up]

    down = (x >= 1e-3) & ~up
    if np.any(down):
        xd = x[down]
        top = l_max + 32 + int(3 * np.sqrt(l_max + np.max(xd)))
        f_next = np.zeros_like(xd)
        f_cur = np.full_like(xd, 1e-30)
        vals = np.zeros((l_max + 1, xd.size))
        total = (2 * top + 1) * f_cur**2
        if top <= l_max:
            vals[top] = f_cur
        for k in range(top, 0, -1):
            f_prev = (2 * k + 1) / xd * f_cur - f_next
            big = np.abs(f_prev) > _RESCALE
            if np.any(big):
                f_prev[big] /= _RESCALE
                f_cur[big] /= _RESCALE
                vals[:, big] /= _RESCALE
                total[big] /= _RESCALE**2
            f_next, f_cur = f_cur, f_prev
            if k - 1 <= l_max:
                vals[k - 1] = f_cur
            total += (2 * (k - 1) + 1) * f_cur**2
        norm = np.sqrt(total)
        # l_max >= 1 here; fix the overall sign against whichever closed form is larger
        j0 = np.sin(xd) / xd
        j1 = np.sin(xd) / xd**2 - np.cos(xd) / xd
        use_j0 = np.abs(j0) >= np.abs(j1)
        ref = np.where(use_j0, j0, j1)
        got = np.where(use_j0, vals[0], vals[1])
        sign = np.where(np.sign(got) == np.sign(ref), 1.0, -1.0)
        out[:, down] = vals * (sign / norm)
    return out.reshape((l_max + 1,) + shape)


def sph_bessel(l, x):
    """Spherical Bessel function j_l(x) for l >= 0 and x >= 0."""
    if l < 0:
        raise DomainError("order must be non-negative")
    out = sph_bessel_orders(l, x)[l]
    return out[()] if out.ndim == 0 else out


def _spin_from_cartesian():
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    mats = []
    for k in range(3):
        s_cart = -1j * eps[k]
        mats.append(CART_TO_SPHERICAL @ s_cart @ SPHERICAL_TO_CART)
    out = np.array(mats)
    out[np.abs(out) < 1e-15] = 0.0
    return out


_SPIN = _spin_from_cartesian()


def spin_matrices():
    """(S_1, S_2, S_3) in the spherical basis; S_3 = diag(-1, 0, 1)."""
    return _SPIN[0].copy(), _SPIN[1].copy(), _SPIN[2].copy()


def spin_exp(angle, generator):
    """exp(-i angle S) for a spin-1 generator S (uses S^3 = S)."""
    s2 = generator @ generator
    return np.eye(3) - 1j * np.sin(angle) * generator + (np.cos(angle) - 1.0) * s2


def rotation_matrix(phi, theta, chi):
    """D = exp(-i S_3 phi) exp(-i S_2 theta) exp(-i S_3 chi)."""
    _, s2, s3 = _SPIN
    return spin_exp(phi, s3) @ spin_exp(theta, s2) @ spin_exp(chi, s3)
