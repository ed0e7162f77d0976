"""Figure rendering for the report paths.

Every figure is written next to the columnar file holding the same data, so
the text output stays the source of truth and the PNGs are a convenience.
The numerical core never imports this module.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_profile_figures",
    "save_run_figures",
    "save_sweep_figure",
]


def save_profile_figures(outdir, profile, decay_rows=None) -> list:
    outdir = Path(outdir)
    written = []
    xi = profile.xi_grid.nodes

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(xi, profile.phi, lw=1.2)
    ax1.set_xlabel(r"$\xi$")
    ax1.set_ylabel(r"$\phi(\xi)$")
    ax1.set_title("wave profile")
    mask = np.abs(profile.dphi) > 1e-12
    if mask.any():
        ax2.plot(xi[mask] ** 2, np.log(np.abs(profile.dphi[mask])), ".", ms=2,
                 label=r"$\log|\phi'|$")
        env = profile.envelope
        if env is not None:
            xx = np.linspace(0.0, np.max(xi[mask] ** 2), 50)
            amp = env.c_amp * abs(profile.u_plus - profile.u_minus)
            ax2.plot(xx, np.log(amp) - env.c0 * xx, "r-", lw=1,
                     label=f"fit: c0={env.c0:.4g}, r2={env.r2:.4f}")
        ax2.legend(fontsize=8)
    ax2.set_xlabel(r"$\xi^2$")
    ax2.set_title("slope envelope")
    fig.tight_layout()
    path = outdir / "profile.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    if decay_rows:
        fig, ax = plt.subplots(figsize=(5, 3.4))
        labels = [f"k={r['k']},j={r['j']},p={r['p']}" for r in decay_rows]
        obs = [r["observed_exponent"] for r in decay_rows]
        pred = [r["predicted_exponent"] for r in decay_rows]
        pos = np.arange(len(decay_rows))
        ax.bar(pos - 0.18, obs, width=0.36, label="observed")
        ax.bar(pos + 0.18, pred, width=0.36, label="predicted")
        ax.set_xticks(pos, labels, rotation=20, fontsize=8)
        ax.set_ylabel("decay exponent in 1+t")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = outdir / "decay_table.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written


def save_run_figures(outdir, result, series, perturbations,
                     boundary=None) -> list:
    outdir = Path(outdir)
    written = []
    x = result.grid.nodes

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    picks = np.unique(np.linspace(0, len(result.states) - 1, 6).astype(int))
    for i in picks:
        ax1.plot(x, result.states[i].u, lw=0.9, label=f"t={result.times[i]:g}")
        ax2.plot(x, perturbations[i][1], lw=0.9)
    ax1.set_xlabel("x")
    ax1.set_ylabel("u")
    ax1.set_title("bacteria density")
    ax1.legend(fontsize=7)
    ax2.set_xlabel("x")
    ax2.set_ylabel("z")
    ax2.set_title("bacteria perturbation")
    fig.tight_layout()
    path = outdir / "snapshots.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    t1 = 1.0 + series.times
    curves = [
        (series.w_norms[:, 1], r"$\|w_x\|$"),
        (series.z_norms[:, 1], r"$\|z_x\|$"),
        (series.w_norms[:, 2], r"$\|w_{xx}\|$"),
        (series.good_norm, r"$\|\lambda w-\mu z\|$"),
    ]
    for vals, label in curves:
        pos = vals > 0
        if pos.any():
            ax.loglog(t1[pos], vals[pos], lw=1.0, label=label)
    ax.set_xlabel("1+t")
    ax.set_ylabel("norm")
    ax.set_title("perturbation decay")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "norms.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    if boundary is not None and "wxx_scaled" in boundary:
        fig, ax = plt.subplots(figsize=(5.2, 3.4))
        ax.semilogx(1.0 + boundary["times"], boundary["wxx_scaled"], lw=1.0)
        ax.set_xlabel("1+t")
        ax.set_ylabel(r"$(1+t)\,|w_{xx}(0,t)|$")
        ax.set_title("scaled boundary curvature")
        fig.tight_layout()
        path = outdir / "boundary.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written


def save_sweep_figure(outdir, axis_key, rows) -> list:
    outdir = Path(outdir)
    ok = [r for r in rows if r.get("status") == "ok"]
    if not ok:
        return []
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    vals = [r["value"] for r in ok]
    for key, label in (("slope_wx", r"$\|w_x\|$"), ("slope_zx", r"$\|z_x\|$"),
                       ("slope_wxx", r"$\|w_{xx}\|$")):
        ys = [r.get(key) for r in ok]
        if all(y is not None for y in ys):
            ax.plot(vals, ys, "o-", ms=3, lw=1.0, label=label)
    ax.set_xlabel(axis_key)
    ax.set_ylabel("fitted exponent")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "sweep.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]
