"""Subcommand bodies shared by the CLI and the determinism check.

Each ``cmd_*`` writes its data files into ``out`` and returns a list of
assertions ``{"name", "measured", "tolerance", "passed"}``.  Data files carry
no timing; ``run_command`` adds wall time to ``summary.json`` only.
"""

from __future__ import annotations

import csv
import time
from pathlib import Path

import numpy as np

from . import acceptance as acc
from . import gauge as gb
from .config import parse_gauge
from .grid import MomentumGrid
from .operators import (
    basis_state,
    commutator_J_r,
    gauge_covariance_check,
    gaussian_state,
    position_eigen_residual,
    refinement_study,
    uncertainty_check,
)
from .plots import write_plot_script
from .synthesis import (
    AngularWeight,
    LocalizedStateSpec,
    RadialSpectrum,
    ZeroOnContourError,
    annular_profile,
    axis_null_report,
    azimuthal_purity,
    field_gauge_invariance,
    synthesize_field,
    vortex_winding,
    write_field_csv,
    write_json,
)

__all__ = ["COMMANDS", "run_command", "assertion"]


def assertion(name, measured, tolerance, passed):
    return {"name": name, "measured": measured, "tolerance": tolerance, "passed": bool(passed)}


def _writer(path, header):
    fh = open(path, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def _g(x):
    return f"{x:.15e}"


# -- basis ---------------------------------------------------------------------------------
def cmd_basis(cfg, out):
    c = cfg["basis"]
    thetas = np.linspace(0.0, np.pi, c["n_theta"])
    header = ["m", "lam", "theta"]
    for vec in ("e_minus", "e_zero", "e_plus"):
        header += [f"{vec}_{mu}_{part}" for mu in ("m1", "0", "p1") for part in ("re", "im")]
    header += ["P_mu-1", "P_mu0", "P_mu+1", "S_z", "L_z", "j_z", "S_z_plus_L_z"]
    prob_err = sum_err = formula_err = 0.0
    fh, w = _writer(out / "basis.csv", header)
    with fh:
        for m in c["m_values"]:
            gauge = gb.GaugeSpec.linear(m)
            for lam in c["lam"]:
                for th in thetas:
                    tr = gb.triad(th, 0.0, gauge)
                    dec = gb.sz_lz_decomposition(m, lam, th)
                    sz, lz, jz = gb.basis_expectations(m, lam, th)
                    probs = dec.probabilities
                    row = [m, lam, f"{th:.12g}"]
                    for vec in (tr.e_minus, tr.e_zero, tr.e_plus):
                        for z in vec:
                            row += [_g(z.real), _g(z.imag)]
                    row += [_g(p) for p in probs] + [_g(sz), _g(lz), _g(jz), _g(sz + lz)]
                    w.writerow(row)
                    prob_err = max(prob_err, abs(probs.sum() - 1))
                    sum_err = max(sum_err, abs(sz + lz - lam * m))
                    if lam == 1:
                        formula_err = max(formula_err, abs(probs[0] - 0.25 * (np.cos(th) - 1) ** 2))
    write_plot_script(out, "basis")
    return [
        assertion("probabilities sum to 1", prob_err, 1e-13, prob_err < 1e-13),
        assertion("S_z + L_z = lam m", sum_err, 1e-12, sum_err < 1e-12),
        assertion("P_{mu=-1} = (cos - 1)^2 / 4 for lam=+1", formula_err, 1e-13, formula_err < 1e-13),
    ]


# -- gauge ---------------------------------------------------------------------------------
def cmd_gauge(cfg, out):
    c = cfg["gauge"]
    gauges = [(name, parse_gauge(name)) for name in c["gauges"]]
    thetas = (np.arange(c["n_theta"]) + 0.5) * np.pi / c["n_theta"]
    phis = 2 * np.pi * np.arange(c["n_phi"]) / c["n_phi"]
    fh, w = _writer(out / "potential.csv",
                    ["gauge", "p", "theta", "phi", "a_x", "a_y", "a_z", "a_theta", "a_phi"])
    with fh:
        for name, g in gauges:
            for th in thetas:
                for ph in phis:
                    s = gb.gauge_potential(g, c["p"], th, ph, c["eps_string"])
                    w.writerow([name, f"{c['p']:.12g}", f"{th:.12g}", f"{ph:.12g}",
                                *[_g(v) for v in s.vector], _g(s.theta_component),
                                _g(s.phi_component)])

    flux_err = 0.0
    fh, w = _writer(out / "flux.csv", ["gauge", "pole", "flux", "expected", "error"])
    with fh:
        for name, g in gauges:
            for pole in ("north", "south"):
                flux = gb.string_flux(g, c["p"], pole, c["flux_eps"])
                if g.is_axial:
                    expected = (1 - g.m) if pole == "north" else -(1 + g.m)
                    err = abs(flux - expected)
                    flux_err = max(flux_err, err)
                    w.writerow([name, pole, _g(flux), _g(expected), _g(err)])
                else:
                    w.writerow([name, pole, _g(flux), "", ""])

    points = acc.random_off_string_points(c["curl_points"], c["seed"])
    orders = []
    fh, w = _writer(out / "curl.csv", ["gauge", "point", "p", "theta", "phi", "step", "rel_error"])
    fo, wo = _writer(out / "curl_order.csv", ["gauge", "point", "order"])
    with fh, fo:
        for name, g in gauges:
            for i, res in enumerate(acc.curl_orders(g, points, c["curl_steps"])):
                p, th, ph = res["point"]
                for h, e in zip(c["curl_steps"], res["errors"]):
                    w.writerow([name, i, f"{p:.12g}", f"{th:.12g}", f"{ph:.12g}", f"{h:.12g}", _g(e)])
                wo.writerow([name, i, f"{res['order']:.6f}"])
                orders.append(res["order"])
    for name in ("potential", "curl"):
        write_plot_script(out, name)
    dev = max(abs(o - 2.0) for o in orders)
    return [
        assertion("string flux (1 - m, -(1 + m))", flux_err, 1e-8, flux_err < 1e-8),
        assertion("curl error order |order - 2|", dev, 0.2, dev <= 0.2),
    ]


# -- operators -----------------------------------------------------------------------------
def cmd_operators(cfg, out):
    c = cfg["operators"]
    tol, target, window = c["tolerance"], c["order_target"], c["order_window"]
    results = []
    fh, w = _writer(out / "operators.csv",
                    ["check", "gauge", "case", "coarse", "fine", "order", "tolerance"])
    with fh:
        grid = MomentumGrid.build(*c["fine"], p_min=c["p_min"], p_max=c["p_max"],
                                  p_spacing="geometric")
        uniform = MomentumGrid.build(*c["fine"], p_min=c["p_min"], p_max=c["p_max"])
        eig = 0.0
        for name in c["gauges"]:
            g = parse_gauge(name)
            for alpha in (0.5, -0.5):
                rep = position_eigen_residual(basis_state(grid, c["lam"], g, alpha), g)
                eig = max(eig, rep.relative)
                w.writerow(["eigenrelation", name, f"alpha={alpha:+g}", "", _g(rep.relative), "",
                            _g(tol)])
            # the translated state oscillates in p, which the geometric grid resolves poorly
            shift = (0.3, -0.2, 0.5)
            rep = position_eigen_residual(basis_state(uniform, c["lam"], g, 0.5, shift), g, shift)
            w.writerow(["eigenrelation", name, "shift=(0.3,-0.2,0.5)", "", _g(rep.relative), "",
                        ""])
        results.append(assertion("eigenrelation residual", eig, tol, eig < tol))

        rows = acc.commutator_study(c)
        for r in rows:
            w.writerow(["[r_j,r_k]", r["gauge"], r["pair"], _g(r["coarse"]), _g(r["fine"]),
                        f"{r['order']:.6f}", _g(tol)])
        results += _study_assertions("[r_j, r_k]", rows, tol, target, window)

        rows = acc.covariance_study(c)
        for r in rows:
            w.writerow(["covariance", f"{r['from']}->table", r["component"], _g(r["coarse"]),
                        _g(r["fine"]), f"{r['order']:.6f}", _g(tol)])
        results += _study_assertions("gauge covariance", rows, tol, target, window)

        coarse = MomentumGrid.build(*c["coarse"], p_min=c["p_min"], p_max=c["p_max"])
        linear = 0.0
        psi = gaussian_state(coarse, c["lam"], gb.ZERO_GAUGE, **acc._state_kwargs(c))
        for k in range(3):
            rep = gauge_covariance_check(psi, gb.ZERO_GAUGE, gb.GaugeSpec.linear(2), k)
            linear = max(linear, rep.relative)
            w.writerow(["covariance", "zero->linear:2", "xyz"[k], _g(rep.relative), "", "", _g(tol)])
        results.append(assertion("gauge covariance zero->linear:2", linear, tol, linear < tol))

        g1 = gb.GaugeSpec.linear(1)
        reps = refinement_study(
            lambda gr: commutator_J_r(gaussian_state(gr, c["lam"], g1, **acc._state_kwargs(c)),
                                      g1, 2, 0),
            acc._resolutions(c), p_min=c["p_min"], p_max=c["p_max"])
        w.writerow(["[J_z,r_x]", "linear:1", "contracted", _g(reps[0].relative),
                    _g(reps[-1].relative), f"{reps[-1].convergence_order:.6f}", _g(tol)])
        results.append(assertion("[J_z, r_x] gauge-term identity", reps[-1].relative, tol,
                                 reps[-1].relative < tol))
        reps = refinement_study(
            lambda gr: commutator_J_r(gaussian_state(gr, c["lam"], g1, **acc._state_kwargs(c)),
                                      g1, 0, 1),
            acc._resolutions(c), p_min=c["p_min"], p_max=c["p_max"])
        order = reps[-1].convergence_order
        w.writerow(["[J_x,r_y]", "linear:1", "contracted", _g(reps[0].relative),
                    _g(reps[-1].relative), f"{order:.6f}", ""])
        results.append(assertion(f"[J_x, r_y] order |order - {target}|", abs(order - target),
                                 window, abs(order - target) <= window))
        # the repeated-index epsilon term, reported for comparison only
        fine = MomentumGrid.build(*c["fine"], p_min=c["p_min"], p_max=c["p_max"])
        rep = commutator_J_r(gaussian_state(fine, c["lam"], g1, **acc._state_kwargs(c)), g1, 0, 1,
                             form="printed")
        w.writerow(["[J_x,r_y]", "linear:1", "printed", "", _g(rep.relative), "", ""])

        worst_bound = 0.0
        violated = 0
        for name in c["gauges"]:
            g = parse_gauge(name)
            if not g.is_axial:
                continue
            psi = gaussian_state(coarse, c["lam"], g, angular="axial", **acc._state_kwargs(c))
            for k in range(3):
                u = uncertainty_check(psi, g, 2, k, include_j2=False)
                worst_bound = max(worst_bound, u.bound)
                violated += not u.satisfied
                w.writerow(["uncertainty J_z", name, "xyz"[k], "", _g(u.bound), "",
                            _g(1e-10)])
        results.append(assertion("J_z uncertainty bound (axial gauges)", worst_bound, 1e-10,
                                 worst_bound < 1e-10))
        results.append(assertion("Robertson inequality violations", violated, 0, violated == 0))
    return results


def _study_assertions(label, rows, tol, target, window):
    fine = max(r["fine"] for r in rows)
    dev = max(abs(r["order"] - target) for r in rows)
    return [
        assertion(f"{label} order |order - {target}|", dev, window, dev <= window),
        assertion(f"{label} fine residual", fine, tol, fine < tol),
    ]


# -- field ---------------------------------------------------------------------------------
def cmd_field(cfg, out):
    c = cfg["field"]
    spec = acc.field_spec_from_config(c)
    l_max = c["l_max"] or None
    r = np.linspace(c["r"][0], c["r"][1], int(c["r"][2]))
    theta = np.linspace(0.0, np.pi, c["n_theta"])
    phi = 2 * np.pi * np.arange(c["n_phi"]) / c["n_phi"]
    fld = synthesize_field(spec, r, theta, phi, c["t"], l_max)
    write_field_csv(out / "field.csv", fld)
    results = []

    fh, w = _writer(out / "winding.csv", ["mu", "expected", "winding", "r", "theta"])
    wind_ok = True
    r0 = r[np.argmin(np.abs(r - 1.0))] if r.size > 1 else r[0]
    t0 = theta[np.argmin(np.abs(theta - np.pi / 2))]
    with fh:
        for mu in (-1, 0, 1):
            n = spec.m - mu
            try:
                wn = vortex_winding(fld, mu, (r0, t0))
            except ZeroOnContourError:
                wn = "zero-on-contour"
            wind_ok &= wn == n
            w.writerow([mu, n, wn, f"{r0:.12g}", f"{t0:.12g}"])
    results.append(assertion("winding = m - mu", int(wind_ok), 1, wind_ok))

    nulls = axis_null_report(fld)
    null = 0.0
    fh, w = _writer(out / "axis.csv", ["mu", "n", "axis_max", "peak", "ratio", "purity"])
    with fh:
        for mu in (-1, 0, 1):
            d = nulls[mu]
            purity, _ = azimuthal_purity(fld, mu)
            w.writerow([mu, d["n"], _g(d["axis_max"]), _g(d["peak"]), _g(d["ratio"]), _g(purity)])
            if d["n"] != 0:
                null = max(null, d["ratio"])
    results.append(assertion("axis null for m - mu != 0", null, 1e-10, null < 1e-10))

    # ring_r is in units of 1/p0 so every spectrum is scanned at the same relative resolution
    ring_x = np.linspace(c["ring_r"][0], c["ring_r"][1], int(c["ring_r"][2]))
    radii = []
    fh, w = _writer(out / "ring.csv", ["p0", "peak_radius"])
    fp, wp = _writer(out / "ring_profile.csv", ["p0", "r", "intensity"])
    with fh, fp:
        for p0 in c["ring_p0"]:
            ring_spec = LocalizedStateSpec(
                spec.m, spec.lam,
                RadialSpectrum.exponential(p0) if c["spectrum"] == "exponential"
                else RadialSpectrum.power_law_cutoff(c["spectrum_alpha"], p0),
                spec.angular)
            prof = annular_profile(ring_spec, ring_x / p0, c["t"], l_max)
            radii.append(prof.peak_radius)
            w.writerow([f"{p0:.12g}", _g(prof.peak_radius)])
            for ri, ii in zip(prof.r, prof.intensity):
                wp.writerow([f"{p0:.12g}", f"{ri:.12g}", _g(ii)])
    order = np.argsort(c["ring_p0"])
    mono = bool(np.all(np.diff(np.asarray(radii)[order]) < 0))
    results.append(assertion("ring radius decreases with p0", int(mono), 1, mono))

    ab_r = r[r > 0][:4] if np.any(r > 0) else np.array([1.0])
    other = parse_gauge(c["compare_gauge"])
    home = spec.gauge(spec.helicities[0])
    if other.is_axial and other.m == home.m:
        other = gb.GaugeSpec.linear(home.m + 1)
    comp = field_gauge_invariance(spec, home, other, ab_r, theta, phi, c["t"])
    raw = field_gauge_invariance(spec, home, other, ab_r, theta, phi, c["t"], compensate=False)
    results.append(assertion("gauge A/B compensated", comp, 1e-8, comp < 1e-8))
    results.append(assertion("gauge A/B uncompensated differs", raw, 1e-2, raw > 1e-2))

    coeffs = {f"lam={lam},mu={mu}": co.as_dict() for (lam, mu), co in fld.coefficients.items()}
    tail = max(co.tail_estimate for co in fld.coefficients.values())
    write_json(out / "field.json", {
        "spec": spec.describe(),
        "l_max": max(co.l_max for co in fld.coefficients.values()),
        "tail_estimate": tail,
        "scale": fld.scale,
        "coefficients": coeffs,
        "diagnostics": {
            "axis": nulls,
            "ring_p0": list(c["ring_p0"]),
            "ring_radius": radii,
            "gauge_ab": {"gauge_a": home.description, "gauge_b": other.description,
                         "compensated": comp, "uncompensated": raw},
        },
    })
    for name in ("intensity", "ring"):
        write_plot_script(out, name)
    results.append(assertion("angular tail estimate", tail, 1e-8, tail < 1e-8))
    return results


# -- verify --------------------------------------------------------------------------------
def cmd_verify(cfg, out, echo=print):
    results = acc.run_all(cfg, echo=echo)
    fh, w = _writer(out / "acceptance.csv", ["key", "title", "passed", "quantity", "value",
                                             "tolerance"])
    with fh:
        for res in results:
            tol = "; ".join(f"{k}={v}" for k, v in res.tolerance.items())
            for k, v in res.measured.items():
                w.writerow([res.key, res.title, res.passed, k, v, tol])
    write_json(out / "acceptance.json", [res.as_dict() for res in results])
    return [assertion(f"{res.key} {res.title}", res.measured, res.tolerance, res.passed)
            for res in results]


COMMANDS = {
    "basis": cmd_basis,
    "gauge": cmd_gauge,
    "operators": cmd_operators,
    "field": cmd_field,
    "verify": cmd_verify,
}


def run_command(name, cfg, out, quiet=False):
    """Run one subcommand into ``out``; returns (exit status, summary dict)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    fn = COMMANDS[name]
    if name == "verify":
        results = fn(cfg, out, echo=None if quiet else print)
    else:
        results = fn(cfg, out)
        if not quiet:
            for a in results:
                print(f"[{'PASS' if a['passed'] else 'FAIL'}] {a['name']}: "
                      f"measured {a['measured']} (tolerance {a['tolerance']})")
    passed = all(a["passed"] for a in results)
    summary = {
        "command": name,
        "config_source": cfg.source,
        "config": cfg.echo(),
        "assertions": results,
        "passed": passed,
        "wall_time_s": time.perf_counter() - start,
    }
    write_json(out / "summary.json", summary)
    return (0 if passed else 1), summary

