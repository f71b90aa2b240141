import csv
import json
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photon_gauge_kit import gauge as gb
from photon_gauge_kit.synthesis import (
    PUBLISHED_COEFFICIENTS,
    AngularWeight,
    LocalizedStateSpec,
    NoRingFoundError,
    RadialSpectrum,
    TruncationError,
    TruncationWarning,
    ZeroOnContourError,
    angular_coefficients,
    annular_profile,
    axis_null_report,
    azimuthal_purity,
    field_gauge_invariance,
    momentum_space_jz,
    radial_transform,
    radial_transforms,
    synthesize_field,
    synthesize_in_gauge,
    vortex_winding,
    winding_number,
    write_field_csv,
    write_json,
)

EXP = RadialSpectrum.exponential(1.0)


def spec(m=1, lam=1, angular=None, radial=EXP):
    return LocalizedStateSpec(m, lam, radial, angular or AngularWeight.sin_power(abs(m) + 1))


def mp_coefficient(g, m, mu, l, lam=1):
    """Independent route: mpmath quadrature of 2 pi sqrt(2 pi) int g e_mu Y_l^n dcos."""
    n = m - mu

    def e_mu(t):
        c, s = mpmath.cos(t), mpmath.sin(t)
        return [(c - lam) / 2, -s / mpmath.sqrt(2), (c + lam) / 2][mu + 1]

    def integrand(t):
        return g(t) * e_mu(t) * mpmath.re(mpmath.spherharm(l, n, t, 0)) * mpmath.sin(t)

    with mpmath.workdps(30):
        val = 2 * mpmath.pi * mpmath.sqrt(2 * mpmath.pi) * mpmath.quad(integrand, [0, mpmath.pi])
    return float(val)


@pytest.mark.parametrize("m,g,gfun,mu", [
    (1, AngularWeight.one(), lambda t: 1, 0),
    (1, AngularWeight.one(), lambda t: 1, 1),
    (0, AngularWeight.sin_theta(), mpmath.sin, 0),
    (2, AngularWeight.sin_power(3), lambda t: mpmath.sin(t) ** 3, -1),
])
def test_coefficients_match_mpmath(m, g, gfun, mu):
    c = angular_coefficients(LocalizedStateSpec(m, 1, EXP, g), mu, l_max=12, strict=False)
    for l, val in c.entries[:6]:
        assert val.imag == 0
        assert val.real == pytest.approx(mp_coefficient(gfun, m, mu, l), abs=1e-12)


def test_selectivity_patterns_and_closed_forms():
    c = angular_coefficients(spec(1, 1, AngularWeight.one()), 0)
    assert c.nonzero_degrees() == [1]
    assert c.entries[0][1].real == pytest.approx(4 * np.pi / np.sqrt(6), rel=1e-14)
    c = angular_coefficients(spec(1, 1, AngularWeight.one()), 1)
    assert c.nonzero_degrees() == [0, 1]
    assert c.entries[0][1].real == pytest.approx(np.pi * np.sqrt(2), rel=1e-14)
    c = angular_coefficients(spec(0, 1, AngularWeight.sin_theta()), 0)
    assert c.nonzero_degrees() == [0, 2]


def test_published_table_shares_the_degree_pattern():
    for (m, kind, mu), table in PUBLISHED_COEFFICIENTS.items():
        g = AngularWeight.one() if kind == "one" else AngularWeight.sin_theta()
        c = angular_coefficients(LocalizedStateSpec(m, 1, EXP, g), mu)
        assert c.nonzero_degrees() == sorted(table)


def test_truncation_strict_and_lenient():
    s = spec(1, 1, AngularWeight.one())
    with pytest.raises(TruncationError):
        angular_coefficients(s, -1, l_max=8)
    with pytest.warns(TruncationWarning):
        c = angular_coefficients(s, -1, l_max=8, strict=False)
    assert c.tail_estimate > 1e-8
    with pytest.raises(ValueError):
        angular_coefficients(s, 0, l_max=0)


def test_automatic_degree_converges_for_smooth_weights():
    for m in (0, 1, 2):
        for mu in (-1, 0, 1):
            c = angular_coefficients(spec(m), mu)
            assert c.tail_estimate < 1e-8


def test_radial_transform_closed_form_with_time():
    # int p^2 e^{-s p} j_0(p r) dp = 2 s / (s^2 + r^2)^2 with s = 1 + i t
    for r in (0.0, 0.5, 3.0, 11.0):
        for t in (0.0, 0.7, -2.0):
            s = 1 + 1j * t
            ref = 2 * s / (s * s + r * r) ** 2
            assert radial_transform(EXP, 0, r, t) == pytest.approx(ref, rel=1e-11, abs=1e-15)


@given(st.integers(1, 6), st.floats(0.1, 12.0))
def test_radial_transform_matches_mpmath(l, r):
    with mpmath.workdps(25):
        ref = mpmath.quad(lambda p: p**2 * mpmath.exp(-p) * mpmath.sqrt(mpmath.pi / (2 * p * r))
                          * mpmath.besselj(l + 0.5, p * r), [0, 10, 40, mpmath.inf])
    assert radial_transform(EXP, l, r).real == pytest.approx(float(ref), rel=1e-9, abs=1e-13)


def test_radial_transforms_batch_matches_single():
    rad = RadialSpectrum.power_law_cutoff(0.5, 2.0)
    batch = radial_transforms(rad, 5, 1.7, 0.3)
    for l in range(6):
        assert batch[l] == pytest.approx(radial_transform(rad, l, 1.7, 0.3), rel=1e-12)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        RadialSpectrum.power_law_cutoff(-3.5)
    with pytest.raises(ValueError):
        RadialSpectrum.exponential(0.0)
    with pytest.raises(ValueError):
        RadialSpectrum.tabulated([0, 1, 2, 3], [1, 1, -1, 0])
    with pytest.raises(ValueError):
        LocalizedStateSpec(1, 2, EXP, AngularWeight.one())
    tab = RadialSpectrum.tabulated(np.linspace(0, 20, 41), np.exp(-np.linspace(0, 20, 41)))
    assert tab(25.0) == 0.0


def test_field_direct_path_matches_projection_path():
    s = spec(1)
    r = np.array([0.5, 1.5])
    th = np.linspace(0, np.pi, 7)
    ph = 2 * np.pi * np.arange(8) / 8
    direct = synthesize_field(s, r, th, ph, normalize=False)
    proj = synthesize_in_gauge(s, s.gauge(), lambda t, f: s.angular(t), r, th, ph)
    assert np.abs(direct.samples - proj.samples).max() < 1e-12 * np.abs(direct.samples).max()


def test_field_normalization_and_norm():
    fld = synthesize_field(spec(1), np.linspace(0, 3, 7), np.linspace(0, np.pi, 9),
                           2 * np.pi * np.arange(8) / 8)
    assert np.sqrt(fld.intensity).max() == pytest.approx(1.0)
    assert fld.scale > 0
    assert fld.l2_norm() > 0


@pytest.mark.parametrize("m", [0, 1, 2])
def test_winding_and_axis_nulls(m):
    fld = synthesize_field(spec(m), np.array([1.0]), np.array([0.0, np.pi / 2, np.pi]),
                           2 * np.pi * np.arange(16) / 16)
    nulls = axis_null_report(fld)
    for mu in (-1, 0, 1):
        assert vortex_winding(fld, mu, (1.0, np.pi / 2)) == m - mu
        ratio, mode = azimuthal_purity(fld, mu)
        assert mode == m - mu and ratio < 1e-12
        if m != mu:
            assert nulls[mu]["ratio"] < 1e-10


def test_vortex_winding_errors():
    fld = synthesize_field(spec(1), np.array([1.0]), np.array([0.0, np.pi / 2]),
                           2 * np.pi * np.arange(16) / 16)
    with pytest.raises(ValueError):
        vortex_winding(fld, 0, (2.0, np.pi / 2))
    with pytest.raises(ZeroOnContourError):
        vortex_winding(fld, 0, (1.0, 0.0))


@given(st.integers(-5, 5), st.integers(12, 40))
def test_winding_number_of_pure_mode(n, samples):
    phi = 2 * np.pi * np.arange(samples) / samples
    assert winding_number(np.exp(1j * n * phi) * (2 + 0.1 * np.cos(phi))) == n


def test_field_gauge_invariance_and_negative_control():
    s = spec(1)
    args = (np.array([0.5, 1.0]), np.linspace(0, np.pi, 5), 2 * np.pi * np.arange(8) / 8)
    comp = field_gauge_invariance(s, gb.ZERO_GAUGE, gb.GaugeSpec.linear(2), *args)
    raw = field_gauge_invariance(s, gb.ZERO_GAUGE, gb.GaugeSpec.linear(2), *args, compensate=False)
    assert comp < 1e-8
    assert raw > 1e-2


def test_ring_radius_scales_inversely_with_p0():
    radii = []
    for p0 in (1.0, 2.0):
        s = LocalizedStateSpec(1, 1, RadialSpectrum.exponential(p0), AngularWeight.sin_power(2))
        radii.append(annular_profile(s, np.linspace(0, 8, 81) / p0).peak_radius)
    assert radii[0] == pytest.approx(2 * radii[1], rel=1e-10)


def test_ring_scan_without_interior_peak():
    s = LocalizedStateSpec(0, 1, EXP, AngularWeight.sin_power(1))
    # a scan that never leaves the core has no interior maximum
    with pytest.raises(NoRingFoundError):
        annular_profile(s, np.array([0.0, 0.1]))


def test_momentum_space_jz_is_m():
    for m in (0, 1, -2):
        assert momentum_space_jz(spec(m)) == pytest.approx(m, abs=1e-8)


def test_both_helicities_superpose():
    s = spec(1, lam=0)
    fld = synthesize_field(s, np.array([1.0]), np.array([np.pi / 3]), np.array([0.0, 1.0]),
                           normalize=False)
    f_plus = synthesize_field(spec(1, 1), fld.r, fld.theta, fld.phi, normalize=False)
    f_minus = synthesize_field(spec(1, -1), fld.r, fld.theta, fld.phi, normalize=False)
    assert np.allclose(fld.samples, f_plus.samples + f_minus.samples, atol=1e-15)


def test_field_csv_layout(tmp_path):
    fld = synthesize_field(spec(1), np.array([0.0, 1.0]), np.array([0.5, 1.0]),
                           np.array([0.0, np.pi]))
    path = tmp_path / "f.csv"
    write_field_csv(path, fld)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["r", "theta", "phi", "t", "mu", "re", "im", "abs2"]
    keys = [(float(r[0]), float(r[1]), float(r[2]), int(r[4])) for r in rows[1:]]
    assert keys == sorted(keys)
    assert len(keys) == 2 * 2 * 2 * 3


def test_write_json_is_canonical(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"b": np.float64(1.5), "a": [np.int64(2), 1 + 2j], "c": np.inf})
    data = json.loads(path.read_text())
    assert list(data) == ["a", "b", "c"]
    assert data["a"] == [2, [1.0, 2.0]]
    assert data["c"] == "inf"
