"""Stand-alone matplotlib scripts that render the CSV outputs.

The toolkit never imports matplotlib; each script reads the CSV next to it
and writes a PNG.  Run them with ``python plot_<name>.py`` in the output
directory.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["SCRIPTS", "write_plot_script"]

_HEADER = '''"""Generated by photon-gauge-kit; renders {csv} to {png}."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def rows(name):
    with open(HERE / name, newline="") as fh:
        return list(csv.DictReader(fh))

'''

_BASIS = '''
curves = defaultdict(lambda: ([], [], [], []))
for row in rows("basis.csv"):
    key = (int(row["m"]), int(row["lam"]))
    th, pm, p0, pp = curves[key]
    th.append(float(row["theta"]))
    pm.append(float(row["P_mu-1"]))
    p0.append(float(row["P_mu0"]))
    pp.append(float(row["P_mu+1"]))

fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
for ax, lam in zip(axes, (1, -1)):
    m = min(k[0] for k in curves if k[1] == lam) if any(k[1] == lam for k in curves) else None
    if m is None:
        continue
    th, pm, p0, pp = curves[(m, lam)]
    ax.plot(th, pm, label="mu=-1")
    ax.plot(th, p0, label="mu=0")
    ax.plot(th, pp, label="mu=+1")
    ax.set_title(f"lam={lam:+d}")
    ax.set_xlabel("theta")
axes[0].set_ylabel("probability")
axes[0].legend()
fig.tight_layout()
fig.savefig(HERE / "basis_probabilities.png", dpi=120)
'''

_CURL = '''
series = defaultdict(lambda: ([], []))
for row in rows("curl.csv"):
    key = (row["gauge"], int(row["point"]))
    h, e = series[key]
    h.append(float(row["step"]))
    e.append(float(row["rel_error"]))

fig, ax = plt.subplots(figsize=(5, 4))
for (gauge, point), (h, e) in sorted(series.items()):
    ax.loglog(h, e, marker="o", lw=0.8, label=gauge if point == 0 else None)
ax.set_xlabel("finite-difference step")
ax.set_ylabel("relative curl error")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "curl_error.png", dpi=120)
'''

_POTENTIAL = '''
import numpy as np

data = defaultdict(list)
for row in rows("potential.csv"):
    data[row["gauge"]].append((float(row["theta"]), float(row["phi"]), float(row["a_phi"])))

fig, axes = plt.subplots(1, len(data), figsize=(4 * len(data), 3.5), squeeze=False)
for ax, (gauge, pts) in zip(axes[0], sorted(data.items())):
    pts = np.array(pts)
    th = np.unique(pts[:, 0])
    ph = np.unique(pts[:, 1])
    grid = pts[:, 2].reshape(th.size, ph.size)
    im = ax.pcolormesh(ph, th, np.arcsinh(grid), shading="nearest")
    ax.set_title(f"asinh(a_phi), {gauge}")
    ax.set_xlabel("phi")
    ax.set_ylabel("theta")
    fig.colorbar(im, ax=ax)
fig.tight_layout()
fig.savefig(HERE / "potential_map.png", dpi=120)
'''

_INTENSITY = '''
import numpy as np

acc = defaultdict(float)
for row in rows("field.csv"):
    acc[(float(row["r"]), float(row["theta"]), float(row["phi"]))] += float(row["abs2"])
phi0 = min(k[2] for k in acc)
pts = sorted((r, th, v) for (r, th, ph), v in acc.items() if ph == phi0)
r = np.unique([p[0] for p in pts])
th = np.unique([p[1] for p in pts])
grid = np.array([p[2] for p in pts]).reshape(r.size, th.size)
x = r[:, None] * np.sin(th)[None, :]
z = r[:, None] * np.cos(th)[None, :]

fig, ax = plt.subplots(figsize=(4.5, 5))
im = ax.pcolormesh(x, z, grid, shading="gouraud")
ax.set_xlabel("x (phi = 0 half-plane)")
ax.set_ylabel("z")
ax.set_aspect("equal")
fig.colorbar(im, ax=ax, label="sum_mu |E_mu|^2")
fig.tight_layout()
fig.savefig(HERE / "field_intensity.png", dpi=120)
'''

_RING = '''
profiles = defaultdict(lambda: ([], []))
for row in rows("ring_profile.csv"):
    r, i = profiles[float(row["p0"])]
    r.append(float(row["r"]))
    i.append(float(row["intensity"]))

fig, ax = plt.subplots(figsize=(5, 4))
for p0, (r, i) in sorted(profiles.items()):
    ax.plot(r, i, label=f"p0={p0:g}")
ax.set_xlabel("r (vartheta = pi/2)")
ax.set_ylabel("normalized ring intensity")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "ring_profile.png", dpi=120)
'''

SCRIPTS = {
    "basis": ("basis.csv", "basis_probabilities.png", _BASIS),
    "curl": ("curl.csv", "curl_error.png", _CURL),
    "potential": ("potential.csv", "potential_map.png", _POTENTIAL),
    "intensity": ("field.csv", "field_intensity.png", _INTENSITY),
    "ring": ("ring_profile.csv", "ring_profile.png", _RING),
}


def write_plot_script(out_dir, name):
    """Write plot_<name>.py into out_dir and return its path."""
    csv_name, png, body = SCRIPTS[name]
    path = Path(out_dir) / f"plot_{name}.py"
    path.write_text(_HEADER.format(csv=csv_name, png=png) + body)
    return path
