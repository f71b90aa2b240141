"""Acceptance criteria, each evaluated at its stated tolerance.

Every function returns a :class:`CriterionResult` holding the measured
values and tolerances it compared.  ``run_all`` evaluates them in order;
the CLI ``verify`` command and the test suite share these functions.
"""

from __future__ import annotations

import filecmp
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gauge as gb
from .config import load_config, parse_gauge
from .grid import MomentumGrid
from .operators import (
    FINE_RESOLUTION,
    basis_state,
    commutator_J_r,
    commutator_r_r,
    gauge_covariance_check,
    gaussian_state,
    position_eigen_residual,
    refinement_study,
    spin_coefficient_derivative,
    uncertainty_check,
)
from .specfun import rotation_matrix
from .synthesis import (
    PUBLISHED_COEFFICIENTS,
    TAIL_TOLERANCE,
    AngularWeight,
    LocalizedStateSpec,
    RadialSpectrum,
    TruncationError,
    angular_coefficients,
    axis_null_report,
    field_gauge_invariance,
    radial_transform,
    synthesize_field,
    vortex_winding,
)

__all__ = ["CriterionResult", "CRITERIA", "run_all", "covariance_gauge", "field_spec_from_config"]


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    measured: dict
    tolerance: dict
    note: str = ""
    details: dict = field(default_factory=dict)

    def line(self):
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        tol = ", ".join(f"{k}={_fmt(v)}" for k, v in self.tolerance.items())
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.key} {self.title}: {meas} (tolerance {tol})"
        return f"{text}; {self.note}" if self.note else text

    def as_dict(self):
        return {
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "note": self.note,
            "details": self.details,
        }


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{v:.3e}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _cfg(config):
    return config if config is not None else load_config()


# -- 1 -------------------------------------------------------------------------------------
def basis_expectation_errors(m_values=range(-2, 3), n_theta=64):
    """Max deviations of <S_z>, <L_z> from the lam = +1 forms, split by helicity.

    ``literal`` compares every helicity with (cos, m - cos); ``signed``
    compares with (lam cos, lam (m - cos)), the values a helicity-lam vector
    in the gauge chi = -m phi must have.
    """
    thetas = np.linspace(0.0, np.pi, n_theta)
    out = {}
    for lam in (1, -1):
        lit = signed = prob = 0.0
        for m in m_values:
            for th in thetas:
                sz, lz, _ = gb.basis_expectations(m, lam, th)
                c = np.cos(th)
                lit = max(lit, abs(sz - c), abs(lz - (m - c)))
                signed = max(signed, abs(sz - lam * c), abs(lz - lam * (m - c)))
                prob = max(prob, abs(gb.sz_lz_decomposition(m, lam, th).probabilities.sum() - 1))
        out[lam] = {"literal": lit, "signed": signed, "probability": prob}
    return out


def criterion_1(config=None):
    errs = basis_expectation_errors()
    tol, ptol = 1e-12, 1e-13
    plus_ok = errs[1]["literal"] < tol
    minus_lit_ok = errs[-1]["literal"] < tol
    prob_ok = max(e["probability"] for e in errs.values()) < ptol
    passed = plus_ok and minus_lit_ok and prob_ok
    note = ""
    if not minus_lit_ok:
        note = ("lam=-1 gives <S_z> = -cos(theta) (helicity-signed form holds to "
                f"{errs[-1]['signed']:.1e}); the unsigned form is unattainable for lam=-1")
    return CriterionResult(
        "C1", "basis expectations",
        passed,
        {"lam+1 err": errs[1]["literal"], "lam-1 err": errs[-1]["literal"],
         "lam-1 signed err": errs[-1]["signed"],
         "prob err": max(e["probability"] for e in errs.values())},
        {"expectation": tol, "probability": ptol},
        note,
        {"errors": {str(k): v for k, v in errs.items()}},
    )


# -- 2 -------------------------------------------------------------------------------------
def _lattice_gauges():
    th = np.linspace(0.0, np.pi, 33)
    ph = 2 * np.pi * np.arange(32) / 32
    tt, ff = np.meshgrid(th, ph, indexing="ij")
    table = gb.GaugeSpec.tabulated(th, ph, 0.7 * np.sin(tt) * np.sin(ff) + 0.3 * np.cos(2 * tt),
                                   "smooth test table")
    return [gb.ZERO_GAUGE, gb.GaugeSpec.linear(1), gb.GaugeSpec.linear(-2), table]


def triad_identity_errors(n=32):
    """Max errors of the four triad identities over an n x n interior lattice."""
    thetas = (np.arange(n) + 0.5) * np.pi / n
    phis = 2 * np.pi * np.arange(n) / n
    worst = {"orthonormality": 0.0, "helicity": 0.0, "phase_rule": 0.0, "d_column": 0.0}
    for g in _lattice_gauges():
        for th in thetas:
            for ph in phis:
                tr = gb.triad(th, ph, g)
                mat = tr.as_matrix()
                worst["orthonormality"] = max(worst["orthonormality"],
                                              np.abs(mat.conj().T @ mat - np.eye(3)).max())
                h = gb.helicity_operator(th, ph)
                for lam, e in ((-1, tr.e_minus), (0, tr.e_zero), (1, tr.e_plus)):
                    worst["helicity"] = max(worst["helicity"], np.abs(h @ e - lam * e).max())
                chi = float(g.chi(th, ph))
                for lam, e in ((-1, tr.e_minus), (1, tr.e_plus)):
                    ref = gb.helicity_vector(lam, th, ph) * np.exp(-1j * lam * chi)
                    worst["phase_rule"] = max(worst["phase_rule"], np.abs(e - ref).max())
                d = rotation_matrix(ph, th, chi)
                worst["d_column"] = max(worst["d_column"], np.abs(d - mat).max())
    return worst


def criterion_2(config=None):
    worst = triad_identity_errors()
    tol = 1e-13
    return CriterionResult("C2", "triad identities", all(v < tol for v in worst.values()),
                           worst, {"max error": tol})


# -- 3 -------------------------------------------------------------------------------------
def criterion_3(config=None):
    cfg = _cfg(config)["gauge"]
    worst = 0.0
    rows = []
    for m in range(-2, 3):
        g = gb.GaugeSpec.linear(m)
        north = gb.string_flux(g, cfg["p"], "north", cfg["flux_eps"])
        south = gb.string_flux(g, cfg["p"], "south", cfg["flux_eps"])
        err = max(abs(north - (1 - m)), abs(south + (1 + m)))
        worst = max(worst, err)
        rows.append({"m": m, "north": north, "south": south, "error": err})
    tol = 1e-8
    return CriterionResult("C3", "Dirac-string flux", worst < tol, {"max error": worst},
                           {"abs": tol}, details={"rows": rows})


# -- 4 -------------------------------------------------------------------------------------
def curl_orders(gauge, points, steps):
    out = []
    logs = np.log(np.asarray(steps))
    for p, th, ph in points:
        errs = [gb.monopole_curl_check(gauge, p, th, ph, h)[2] for h in steps]
        slope = np.polyfit(logs, np.log(errs), 1)[0]
        out.append({"point": [p, th, ph], "errors": errs, "order": float(slope)})
    return out


def random_off_string_points(n, seed):
    rng = np.random.default_rng(seed)
    return [(float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.3, np.pi - 0.3)),
             float(rng.uniform(0.0, 2 * np.pi))) for _ in range(n)]


def criterion_4(config=None):
    cfg = _cfg(config)["gauge"]
    points = random_off_string_points(cfg["curl_points"], cfg["seed"])
    orders = []
    rows = []
    for name in cfg["gauges"]:
        res = curl_orders(parse_gauge(name), points, cfg["curl_steps"])
        orders += [r["order"] for r in res]
        rows.append({"gauge": name, "points": res})
    dev = max(abs(o - 2.0) for o in orders)
    return CriterionResult("C4", "monopole curl order", dev <= 0.2,
                           {"min order": min(orders), "max order": max(orders)},
                           {"order": "2.0 +- 0.2"}, details={"rows": rows})


# -- 5 -------------------------------------------------------------------------------------
def _resolutions(cfg):
    return (tuple(cfg["coarse"]), tuple(cfg["fine"]))


def _grid_kwargs(cfg):
    return {"p_min": cfg["p_min"], "p_max": cfg["p_max"]}


def _state_kwargs(cfg):
    return {"alpha": cfg["alpha"], "p_center": cfg["p_center"], "width": cfg["width"]}


def commutator_study(cfg):
    rows = []
    for name in cfg["gauges"]:
        gauge = parse_gauge(name)
        for j, k in ((0, 1), (1, 2), (0, 2)):
            reps = refinement_study(
                lambda g: commutator_r_r(gaussian_state(g, cfg["lam"], gauge, **_state_kwargs(cfg)),
                                         gauge, j, k),
                _resolutions(cfg), **_grid_kwargs(cfg))
            rows.append({"gauge": name, "pair": "xyz"[j] + "xyz"[k],
                         "coarse": reps[0].relative, "fine": reps[-1].relative,
                         "order": reps[-1].convergence_order})
    return rows


def _order_criterion(key, title, rows, cfg, note_if_magnitude):
    tol = cfg["tolerance"]
    target, window = cfg["order_target"], cfg["order_window"]
    fine = max(r["fine"] for r in rows)
    orders = [r["order"] for r in rows]
    order_ok = all(abs(o - target) <= window for o in orders)
    mag_ok = fine < tol
    note = ""
    if order_ok and not mag_ok:
        note = note_if_magnitude
    return CriterionResult(
        key, title, order_ok and mag_ok,
        {"max fine residual": fine, "min order": min(orders), "max order": max(orders)},
        {"fine residual": tol, "order": f"{target} +- {window}"}, note, {"rows": rows})


MAGNITUDE_NOTE = ("order met; the residual has units of length^2 and its size is fixed "
                  "by the momentum scale of the test state")


def criterion_5(config=None):
    cfg = _cfg(config)["operators"]
    rows = commutator_study(cfg)
    return _order_criterion("C5", "commuting components", rows, cfg, MAGNITUDE_NOTE)


# -- 6 -------------------------------------------------------------------------------------
def criterion_6(config=None):
    cfg = _cfg(config)["operators"]
    grid = MomentumGrid.build(*cfg["fine"], p_min=cfg["p_min"], p_max=cfg["p_max"],
                              p_spacing="geometric")
    rows = []
    for name in cfg["gauges"]:
        gauge = parse_gauge(name)
        for alpha in (0.5, -0.5):
            for lam in (1, -1):
                rep = position_eigen_residual(basis_state(grid, lam, gauge, alpha), gauge)
                rows.append({"gauge": name, "alpha": alpha, "lam": lam, "residual": rep.relative})
    worst = max(r["residual"] for r in rows)
    tol = cfg["tolerance"]
    return CriterionResult("C6", "position eigenrelation", worst < tol, {"max residual": worst},
                           {"relative": tol}, details={"rows": rows})


# -- 7 -------------------------------------------------------------------------------------
def covariance_gauge(path=""):
    """Gauge for the covariance study: a table file, or a smooth built-in chi(theta, phi)."""
    if path:
        return gb.GaugeSpec.from_csv(path)
    th = np.linspace(0.0, np.pi, 65)
    ph = 2 * np.pi * np.arange(64) / 64
    tt, ff = np.meshgrid(th, ph, indexing="ij")
    chi = 0.8 * np.sin(tt) ** 2 * np.cos(ff) + 0.5 * np.cos(tt)
    return gb.GaugeSpec.tabulated(th, ph, chi, "built-in covariance table")


def covariance_study(cfg):
    target = covariance_gauge(cfg["covariance_table"])
    rows = []
    for name in cfg["gauges"]:
        source = parse_gauge(name)
        for k in range(3):
            reps = refinement_study(
                lambda g: gauge_covariance_check(
                    gaussian_state(g, cfg["lam"], source, **_state_kwargs(cfg)), source, target, k),
                _resolutions(cfg), **_grid_kwargs(cfg))
            rows.append({"from": name, "to": target.description, "component": "xyz"[k],
                         "coarse": reps[0].relative, "fine": reps[-1].relative,
                         "order": reps[-1].convergence_order})
    return rows


def axial_covariance_residuals(cfg):
    """Gauge changes within the chi = -m phi family: exact up to rounding."""
    grid = MomentumGrid.build(*cfg["coarse"], **_grid_kwargs(cfg))
    out = []
    for a, b in ((0, 1), (0, 2), (1, -1)):
        ga, gbb = gb.GaugeSpec.linear(a), gb.GaugeSpec.linear(b)
        psi = gaussian_state(grid, cfg["lam"], ga, **_state_kwargs(cfg))
        out.append(max(gauge_covariance_check(psi, ga, gbb, k).relative for k in range(3)))
    return out


def criterion_7(config=None):
    cfg = _cfg(config)["operators"]
    rows = covariance_study(cfg)
    res = _order_criterion("C7", "gauge covariance", rows, cfg, MAGNITUDE_NOTE)
    res.details["linear_family"] = axial_covariance_residuals(cfg)
    return res


# -- 8 -------------------------------------------------------------------------------------
def criterion_8(config=None):
    cfg = _cfg(config)["operators"]
    grid = MomentumGrid.build(*cfg["fine"], **_grid_kwargs(cfg))
    coarse = MomentumGrid.build(*cfg["coarse"], **_grid_kwargs(cfg))
    pointwise = 0.0
    bounds = []
    for m in range(-2, 3):
        gauge = gb.GaugeSpec.linear(m)
        for k in range(3):
            pointwise = max(pointwise, float(np.abs(spin_coefficient_derivative(grid, gauge, 2, k)).max()))
        psi = gaussian_state(coarse, cfg["lam"], gauge, angular="axial", **_state_kwargs(cfg))
        for k in range(3):
            bounds.append(uncertainty_check(psi, gauge, 2, k, include_j2=False).bound)
    tol = 1e-10
    return CriterionResult(
        "C8", "J_z compatibility", pointwise < tol and max(bounds) < tol,
        {"max |d s_z/d p_k|": pointwise, "max bound": max(bounds)},
        {"pointwise": tol, "bound": tol})


# -- 9 -------------------------------------------------------------------------------------
SELECTIVITY_CASES = (
    (1, AngularWeight.one(), 0, [1]),
    (1, AngularWeight.one(), 1, [0, 1]),
    (0, AngularWeight.sin_theta(), 0, [0, 2]),
)


def selectivity_table():
    rows = []
    rad = RadialSpectrum.exponential(1.0)
    for m, g, mu, expected in SELECTIVITY_CASES:
        c = angular_coefficients(LocalizedStateSpec(m, 1, rad, g), mu)
        vals = np.abs(c.values())
        surviving = c.nonzero_degrees(1e-10)
        others = [a for l, a in zip(c.degrees(), vals) if l not in expected]
        published = PUBLISHED_COEFFICIENTS[(m, g.kind, mu)]
        rows.append({
            "m": m, "g": g.kind, "mu": mu, "expected": expected, "surviving": surviving,
            "max_other_relative": float(max(others) / vals.max()) if others else 0.0,
            "coefficients": {int(l): [float(v.real), float(v.imag)] for l, v in c.entries
                             if l in expected},
            "published": {int(l): float(v) for l, v in published.items()},
        })
    return rows


def criterion_9(config=None):
    rows = selectivity_table()
    ok = all(r["surviving"] == r["expected"] and r["max_other_relative"] < 1e-10 for r in rows)
    return CriterionResult(
        "C9", "c_{mu,l} selectivity", ok,
        {"patterns": [r["surviving"] for r in rows],
         "max other": max(r["max_other_relative"] for r in rows)},
        {"relative": 1e-10}, details={"rows": rows})


# -- 10 ------------------------------------------------------------------------------------
def criterion_10(config=None):
    rad = RadialSpectrum.exponential(1.0)
    rs = np.linspace(0.0, 20.0, 81)
    errs = [abs(radial_transform(rad, 0, r, 0.0) - 2 / (1 + r * r) ** 2) / (2 / (1 + r * r) ** 2)
            for r in rs]
    tol = 1e-10
    return CriterionResult("C10", "radial transform oracle", max(errs) < tol,
                           {"max rel error": max(errs)}, {"relative": tol})


# -- 11 ------------------------------------------------------------------------------------
def vortex_table(p0=1.0):
    rows = []
    theta = np.array([0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi])
    phi = 2 * np.pi * np.arange(16) / 16
    r = np.array([0.5, 1.0, 2.0])
    for m in (0, 1, 2):
        spec = LocalizedStateSpec(m, 1, RadialSpectrum.exponential(p0),
                                  AngularWeight.sin_power(abs(m) + 1))
        fld = synthesize_field(spec, r, theta, phi)
        nulls = axis_null_report(fld)
        for mu in (-1, 0, 1):
            rows.append({"m": m, "mu": mu, "expected": m - mu,
                         "winding": vortex_winding(fld, mu, (1.0, np.pi / 2)),
                         "axis_ratio": nulls[mu]["ratio"]})
    return rows


def criterion_11(config=None):
    rows = vortex_table()
    wind_ok = all(r["winding"] == r["expected"] for r in rows)
    null = max(r["axis_ratio"] for r in rows if r["expected"] != 0)
    return CriterionResult("C11", "vortex winding and axis nulls", wind_ok and null < 1e-10,
                           {"windings exact": wind_ok, "max axis ratio": null},
                           {"axis ratio": 1e-10}, details={"rows": rows})


# -- 12 ------------------------------------------------------------------------------------
def criterion_12(config=None):
    spec = LocalizedStateSpec(1, 1, RadialSpectrum.exponential(1.0), AngularWeight.sin_power(2))
    r = np.array([0.5, 1.0, 2.0, 3.0])
    th = np.linspace(0.0, np.pi, 9)
    ph = 2 * np.pi * np.arange(16) / 16
    a, b = gb.ZERO_GAUGE, gb.GaugeSpec.linear(1)
    comp = field_gauge_invariance(spec, a, b, r, th, ph)
    raw = field_gauge_invariance(spec, a, b, r, th, ph, compensate=False)
    return CriterionResult("C12", "field gauge invariance", comp < 1e-8 and raw > 1e-2,
                           {"compensated": comp, "uncompensated": raw},
                           {"compensated": 1e-8, "uncompensated above": 1e-2})


# -- 13 ------------------------------------------------------------------------------------
def criterion_13(config=None):
    """Regenerate the basis, gauge and field outputs twice and compare bytes."""
    from .commands import run_command

    cfg = _cfg(config)
    mismatched = []
    compared = 0
    with tempfile.TemporaryDirectory() as tmp:
        for cmd in ("basis", "gauge", "field"):
            a, b = Path(tmp) / f"{cmd}_a", Path(tmp) / f"{cmd}_b"
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                run_command(cmd, cfg, a, quiet=True)
                run_command(cmd, cfg, b, quiet=True)
            names = sorted(p.name for p in a.iterdir() if p.name != "summary.json")
            for name in names:
                compared += 1
                if not filecmp.cmp(a / name, b / name, shallow=False):
                    mismatched.append(f"{cmd}/{name}")
    return CriterionResult("C13", "determinism", not mismatched and compared > 0,
                           {"files compared": compared, "mismatched": len(mismatched)},
                           {"mismatched": 0}, details={"mismatched": mismatched})


# -- auxiliary -----------------------------------------------------------------------------
def field_spec_from_config(fcfg):
    if fcfg["spectrum"] == "exponential":
        rad = RadialSpectrum.exponential(fcfg["p0"])
    else:
        rad = RadialSpectrum.power_law_cutoff(fcfg["spectrum_alpha"], fcfg["p0"])
    if fcfg["angular"] == "one":
        ang = AngularWeight.one()
    elif fcfg["angular"] == "sin_theta":
        ang = AngularWeight.sin_theta()
    else:
        power = fcfg["power"] if fcfg["power"] >= 0 else abs(fcfg["m"]) + 1
        ang = AngularWeight.sin_power(power)
    return LocalizedStateSpec(fcfg["m"], fcfg["lam"], rad, ang)


def criterion_truncation(config=None):
    fcfg = _cfg(config)["field"]
    spec = field_spec_from_config(fcfg)
    l_max = fcfg["l_max"] or None
    tails = {}
    for lam in spec.helicities:
        for mu in (-1, 0, 1):
            if l_max is not None and l_max < abs(spec.m - mu):
                tails[f"{lam},{mu}"] = float("inf")
                continue
            c = angular_coefficients(spec, mu, l_max, lam, strict=False) if l_max else None
            if c is None:
                try:
                    c = angular_coefficients(spec, mu, None, lam, strict=True)
                except TruncationError:
                    c = angular_coefficients(spec, mu, None, lam, strict=False)
            tails[f"{lam},{mu}"] = c.tail_estimate
    worst = max(tails.values())
    return CriterionResult("T", "angular truncation", worst < TAIL_TOLERANCE,
                           {"max tail estimate": worst, "l_max": fcfg["l_max"] or "auto"},
                           {"tail": TAIL_TOLERANCE}, details={"tails": tails})


CRITERIA = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
    criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13,
    criterion_truncation,
]


def run_all(config=None, echo=print):
    results = []
    for crit in CRITERIA:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = crit(config)
        if echo:
            echo(res.line())
        results.append(res)
    return results
