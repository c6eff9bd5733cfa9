"""Rendering of the three figure kinds from harness CSV files.

The input formats (consumed as plain files, nothing imported from the
integrator package):

* order study:  header ``h,err_ambient,err_riemannian``, one row per step
  size, trailing comment ``# slope=<value>``;
* drift study:  header ``t,<method>,<method>,...``, energy error columns;
* trajectory:   header ``t,x0,...,x{n-1},H,dH``.

All figures are rendered with the Agg backend and are a pure function of
their inputs.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (after backend selection)

DRIFT_FLOOR = 1e-17
DEFAULT_ORDERS = (1, 2, 4, 6, 8)


def read_csv(path: str) -> tuple[list[str], np.ndarray, dict[str, str]]:
    """Read a harness CSV: (column names, data matrix, trailing comments)."""
    names, rows, comments = [], [], {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                comments[key] = value
                continue
            if not names:
                names = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    data = np.array(rows) if rows else np.empty((0, len(names)))
    return names, data, comments


def _require_columns(path, names, required):
    missing = [c for c in required if c not in names]
    if missing:
        raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")


def _series_label(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem


def plot_order(paths, out: str, orders=DEFAULT_ORDERS):
    """Log-log error vs step size, one curve per input CSV, plus one black
    dashed reference line per requested order.

    Each reference line is anchored at the smallest-h point of the series
    whose fitted slope (the CSV's ``# slope=`` comment) is closest to that
    order, and spans that series' h-range."""
    if not paths:
        raise ValueError("order figure needs at least one input CSV")
    series = []
    for path in paths:
        names, data, comments = read_csv(path)
        _require_columns(path, names, ("h", "err_ambient"))
        if data.shape[0] == 0:
            raise ValueError(f"{path}: no data rows")
        h = data[:, names.index("h")]
        err = data[:, names.index("err_ambient")]
        keep = np.isfinite(err) & (err > 0)
        if not np.any(keep):
            raise ValueError(f"{path}: no finite error values")
        slope = float(comments.get("slope", "nan"))
        series.append((_series_label(path), h[keep], err[keep], slope))

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, h, err, slope in series:
        text = label if not np.isfinite(slope) else f"{label} ({slope:.2f})"
        ax.loglog(h, err, marker="o", markersize=4, label=text)
    for order in orders:
        slopes = [s[3] for s in series]
        finite = [s if np.isfinite(s) else -np.inf for s in slopes]
        anchor = series[int(np.argmin([abs(s - order) for s in finite]))]
        _, h, err, _ = anchor
        i = int(np.argmin(h))
        line_h = np.array([np.min(h), np.max(h)])
        line_e = err[i] * (line_h / h[i]) ** order
        ax.loglog(line_h, line_e, "k--", linewidth=0.9)
        ax.annotate(f"order {order}", (line_h[-1], line_e[-1]),
                    fontsize=8, textcoords="offset points", xytext=(4, 0))
    ax.set_xlabel("step size h")
    ax.set_ylabel("error at final time")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(out)
    return fig


def plot_drift(path: str, out: str):
    """Semilog-y |energy error| vs time, one series per method column;
    values below the plot floor (including exact zeros) are clamped at
    1e-17 so conserved energies remain visible."""
    names, data, _ = read_csv(path)
    _require_columns(path, names, ("t",))
    if len(names) < 2:
        raise ValueError(f"{path}: drift CSV needs method columns besides t")
    if data.shape[0] == 0:
        raise ValueError(f"{path}: no data rows")
    t = data[:, names.index("t")]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for name in names[1:]:
        drift = np.abs(data[:, names.index(name)])
        ax.semilogy(t, np.maximum(drift, DRIFT_FLOOR), label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("|H(u(t)) - H(u(0))|")
    ax.set_ylim(bottom=DRIFT_FLOOR / 2)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(out)
    return fig


def _is_coarse(path: str, n_rows: int) -> bool:
    """Coarse (marker) trajectories vs fine (line) trajectories: decided
    by the harness file-name tags when present, by sample count
    otherwise."""
    stem = os.path.splitext(os.path.basename(path))[0]
    if "_ia_" in stem or stem.endswith("_ia"):
        return True
    if "_sia_" in stem or stem.endswith("_sia"):
        return False
    return n_rows <= 100


def plot_sphere(paths, out: str):
    """3-D unit sphere with trajectory overlays: fine runs as solid black
    curves, coarse runs as red dots.  Inputs must be single-sphere
    trajectories (columns t,x0,x1,x2,H,dH)."""
    if not paths:
        raise ValueError("sphere figure needs at least one input CSV")
    trajectories = []
    for path in paths:
        names, data, _ = read_csv(path)
        coords = [c for c in names if c.startswith("x")]
        if coords != ["x0", "x1", "x2"]:
            raise ValueError(f"{path}: not a single-sphere trajectory "
                             f"(state columns {coords})")
        _require_columns(path, names, ("t", "x0", "x1", "x2"))
        if data.shape[0] == 0:
            raise ValueError(f"{path}: no data rows")
        xyz = data[:, [names.index(c) for c in ("x0", "x1", "x2")]]
        radii = np.linalg.norm(xyz, axis=1)
        if np.max(np.abs(radii - 1.0)) > 1e-6:
            raise ValueError(f"{path}: trajectory leaves the unit sphere")
        trajectories.append((path, xyz))

    fig = plt.figure(figsize=(5.5, 5.5))
    ax = fig.add_subplot(projection="3d")
    phi = np.linspace(0.0, np.pi, 25)
    theta = np.linspace(0.0, 2.0 * np.pi, 49)
    ax.plot_wireframe(np.outer(np.sin(phi), np.cos(theta)),
                      np.outer(np.sin(phi), np.sin(theta)),
                      np.outer(np.cos(phi), np.ones_like(theta)),
                      color="0.85", linewidth=0.3)
    for path, xyz in trajectories:
        if _is_coarse(path, xyz.shape[0]):
            ax.scatter(xyz[:, 0], xyz[:, 1], xyz[:, 2], color="red", s=12,
                       depthshade=False)
        else:
            ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color="black",
                    linewidth=1.0)
    ax.set_box_aspect((1, 1, 1))
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(out)
    return fig
