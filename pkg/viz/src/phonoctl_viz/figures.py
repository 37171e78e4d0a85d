"""Figure builders: one function per figure kind, all deterministic.

Every function takes parsed inputs and returns a matplotlib Figure with a
fixed size; nothing here touches the clock or global state, so repeated
renders of the same inputs are byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure

from .io import SchemaError, columns

FIGSIZE = (7.0, 4.5)
DPI = 150


def save(fig: Figure, out_path):
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "phonoctl-viz"})


def rates_figure(header, rows) -> Figure:
    k, r_a, r_t, r_r, total = columns(header, rows, "k", "r_a", "r_t", "r_r", "sum")
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot(111)
    ax.plot(k, r_t, label="transmission $r_t$", color="tab:blue")
    ax.plot(k, r_r, label="reflection $r_r$", color="tab:orange")
    ax.plot(k, r_a, label="absorption $r_a$", color="tab:green")
    ax.plot(k, total, label="sum", color="black", linestyle=":", linewidth=1)
    ax.axhline(1.0, color="gray", linewidth=0.5, zorder=0)
    ax.set_xlabel("wavenumber $k$")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.05, 1.1)
    ax.legend(loc="center right", fontsize=8)
    ax.set_title("scattering rates")
    fig.tight_layout()
    return fig


def control_figure(header, rows, design=None) -> Figure:
    t, F, F_N = columns(header, rows, "t", "F", "F_N")
    n_panels = 2 if design is not None else 1
    fig = Figure(figsize=(FIGSIZE[0], FIGSIZE[1] * n_panels / 1.5))
    ax = fig.add_subplot(n_panels, 1, 1)
    ax.plot(t, F, label="$F(t)$", color="tab:blue", linewidth=0.8)
    ax.plot(t, F_N, label="$F_N(t)$ (cutoff)", color="tab:red", linewidth=0.8)
    nz = np.flatnonzero(np.abs(F_N) > 0)
    if nz.size:
        ax.axvline(t[nz[-1]], color="gray", linewidth=0.5, linestyle="--")
    ax.set_xlabel("time $t$")
    ax.set_ylabel("control")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("synthesized boundary control")
    if design is not None:
        d_header, d_rows = design
        k, fb_re, fb_im = columns(d_header, d_rows, "k", "Fbar_re", "Fbar_im")
        ax2 = fig.add_subplot(n_panels, 1, 2)
        ax2.plot(k, fb_re, label=r"Re $\bar F$", color="tab:blue")
        ax2.plot(k, fb_im, label=r"Im $\bar F$", color="tab:orange")
        ax2.set_xlabel("wavenumber $k$")
        ax2.set_ylabel("frequency response")
        ax2.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def heatmap_extent(meta) -> tuple:
    """Plot extent taken verbatim from the sidecar grids."""
    k_grid = np.array(meta["k_grid"])
    if meta["kind"] == "wigner_x" or meta["kind"] == "kinetic":
        axis0 = np.array(meta["x_grid"])
        label0 = "position $x$"
    elif meta["kind"] == "wigner_xi":
        axis0 = np.array(meta["xi_grid"])
        label0 = r"offset $\xi$"
    else:
        raise SchemaError(f"cannot draw heatmap for grid kind {meta['kind']!r}")
    return (float(axis0[0]), float(axis0[-1]), float(k_grid[0]), float(k_grid[-1])), label0


def wigner_heatmap_figure(values, meta) -> Figure:
    extent, label0 = heatmap_extent(meta)
    fig = Figure(figsize=FIGSIZE)
    ax = fig.add_subplot(111)
    img = ax.imshow(
        np.real(values).T,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="magma",
        interpolation="nearest",
    )
    fig.colorbar(img, ax=ax, label="Wigner density")
    ax.set_xlabel(label0)
    ax.set_ylabel("wavenumber $k$")
    ax.set_title(f"{meta['kind']} at t = {meta['t']:g} (eps = {meta['eps']:g})")
    if meta["kind"] == "kinetic" and any(w > 0 for w in meta.get("atom_weight", [])):
        # singular front x = v_g(k) t drawn as a curve, width tracking weight
        k_grid = np.array(meta["k_grid"])
        v_g = np.array(meta["v_g"])
        w = np.array(meta["atom_weight"])
        x_front = v_g * meta["t"]
        x_front = x_front - np.round(x_front)
        pts = np.column_stack([x_front, k_grid]).reshape(-1, 1, 2)
        segs = np.concatenate([pts[:-1], pts[1:]], axis=1)
        widths = 0.5 + 4.0 * (w[:-1] + w[1:]) / (2.0 * max(float(np.max(w)), 1e-300))
        ax.add_collection(LineCollection(segs, linewidths=widths, colors="cyan"))
    fig.tight_layout()
    return fig


def comparison_figure(header, rows, fractions=None) -> Figure:
    names = [row[header.index("test_fn_id")] for row in rows]
    simulated, closed, stderr = columns(header, rows, "simulated", "closed_form", "stderr")
    n_panels = 2 if fractions is not None else 1
    fig = Figure(figsize=(FIGSIZE[0], FIGSIZE[1] * n_panels / 1.5))
    ax = fig.add_subplot(1, n_panels, 1)
    pos = np.arange(len(names))
    ax.bar(pos - 0.2, simulated, width=0.4, yerr=stderr, label="simulated", color="tab:blue")
    ax.bar(pos + 0.2, closed, width=0.4, label="closed form", color="tab:orange")
    ax.set_xticks(pos)
    ax.set_xticklabels(names, rotation=45, fontsize=7)
    ax.set_ylabel("pairing value")
    ax.legend(fontsize=8)
    ax.set_title("test-function pairings")
    if fractions is not None:
        f_header, f_rows = fractions
        mt, mr, ma, tt, tr, ta = columns(
            f_header, f_rows,
            "measured_t", "measured_r", "measured_a", "theory_t", "theory_r", "theory_a",
        )
        ax2 = fig.add_subplot(1, n_panels, 2)
        pos3 = np.arange(3)
        ax2.bar(pos3 - 0.2, [mt[0], mr[0], ma[0]], width=0.4, label="measured", color="tab:blue")
        ax2.bar(pos3 + 0.2, [tt[0], tr[0], ta[0]], width=0.4, label="theory", color="tab:orange")
        ax2.set_xticks(pos3)
        ax2.set_xticklabels(["transmitted", "reflected", "absorbed"], fontsize=8)
        ax2.set_ylabel("energy fraction")
        ax2.legend(fontsize=8)
        ax2.set_title("packet energy split")
    fig.tight_layout()
    return fig
