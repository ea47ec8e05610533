"""Matplotlib figure rendering for the command-line reports.

Figures are written next to the delimited outputs; PNG metadata that
varies between runs is stripped so identical configs produce identical
bytes.
"""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import LensDomain  # noqa: E402
from .grids import POLAR, GridField  # noqa: E402


def _finish(fig, path):
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def _unit_circle(ax):
    t = np.linspace(0.0, 2.0 * math.pi, 361)
    ax.plot(np.cos(t), np.sin(t), color="black", lw=1.0)


def type_map_figure(x, y, disc, path):
    """Sign map of a discriminant over the plane, unit circle overlaid."""
    fig, ax = plt.subplots(figsize=(5.4, 4.8))
    lim = float(np.abs(disc).max()) or 1.0
    pm = ax.pcolormesh(x, y, disc.T, cmap="RdBu", vmin=-lim, vmax=lim,
                       shading="auto")
    fig.colorbar(pm, ax=ax, label="discriminant")
    _unit_circle(ax)
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title("operator type: elliptic (+) / hyperbolic (-)")
    ax.set_aspect("equal")
    _finish(fig, path)


def characteristics_figure(paths, path):
    """Traced characteristic polylines against the unit circle."""
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    _unit_circle(ax)
    for k, pts in enumerate(paths):
        ax.plot(pts[:, 0], pts[:, 1], lw=1.2, label=f"path {k}")
        ax.plot(pts[0, 0], pts[0, 1], marker="o", ms=3, color="black")
    if len(paths) <= 8:
        ax.legend(fontsize=7)
    ax.set_aspect("equal")
    ax.set_title("characteristics: tangent lines to the circle")
    _finish(fig, path)


def domain_figure(dom: LensDomain, leaf_count, path):
    """Lens domain with its characteristic foliation sketched."""
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    _unit_circle(ax)
    th = np.linspace(-dom.theta0, dom.theta0, 121)
    ax.plot(dom.eps * np.cos(th), dom.eps * np.sin(th), color="tab:blue",
            lw=1.5, label="inner arc (data)")
    for sgn in (+1.0, -1.0):
        rr = np.linspace(dom.eps, 1.0, 2)
        ax.plot(rr * math.cos(sgn * dom.theta0), rr * math.sin(sgn * dom.theta0),
                color="tab:blue", lw=1.5)
    ax.plot(np.cos(th), np.sin(th), color="tab:orange", lw=2.0,
            label="type-change arc")
    for leaf in dom.foliation_leaves(leaf_count):
        for line in (leaf.upper, leaf.lower):
            touch = np.array([line.n1, line.n2]) * line.d
            pole = np.array([leaf.pole.x, leaf.pole.y])
            seg = np.vstack([touch, pole])
            ax.plot(seg[:, 0], seg[:, 1], color="tab:green", lw=0.8,
                    alpha=0.7)
    ax.plot([dom.pole.x], [dom.pole.y], marker="*", color="tab:red", ms=10,
            label="pole")
    ax.set_aspect("equal")
    ax.legend(fontsize=7, loc="upper left")
    ax.set_title(f"lens domain (x0 = {dom.x0:g}, eps = {dom.eps:g})")
    _finish(fig, path)


def heatmap_figure(field: GridField, path, title: str = ""):
    """Per-component heatmaps of a grid field in chart coordinates."""
    ncomp = field.components
    fig, axes = plt.subplots(1, ncomp, figsize=(5.2 * ncomp, 4.2),
                             squeeze=False)
    x = field.axis0()
    y = field.axis1()
    for k in range(ncomp):
        ax = axes[0][k]
        vals = field.component(k)
        plot_vals = np.ma.masked_invalid(
            np.ma.masked_array(vals, mask=field.mask)
            if field.mask is not None else vals)
        pm = ax.pcolormesh(x, y, plot_vals.T, cmap="viridis", shading="auto")
        fig.colorbar(pm, ax=ax)
        if field.chart == POLAR:
            ax.set_xlabel("r")
            ax.set_ylabel("theta")
        else:
            ax.set_xlabel("axis 0")
            ax.set_ylabel("axis 1")
        if ncomp > 1:
            ax.set_title(f"component {k + 1}")
    if title:
        fig.suptitle(title)
    _finish(fig, path)


def curves_figure(x, curves: dict, path, xlabel: str, ylabel: str,
                  loglog: bool = False, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    plot = ax.loglog if loglog else ax.plot
    for label, ys in curves.items():
        plot(x, ys, marker="o", ms=3, lw=1.2, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def eta_profiles_figure(etas, profiles: dict, path, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    for label, ys in profiles.items():
        ax.plot(etas, ys, lw=1.4, label=label)
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xlabel("eta")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)
