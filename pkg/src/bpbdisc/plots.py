"""Static SVG summaries."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .stolz import boundary_points  # noqa: E402

plt.rcParams["svg.hashsalt"] = "bpbdisc"


def summary_svg(path, result) -> None:
    """Region with the image of the circle under eta, and slack bars for each verified inequality."""
    eps = result.eps
    eta = result.N.eta
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(11, 4.8))

    b = boundary_points(eps, 1024)
    ax0.fill(b.real, b.imag, color="#dde8f5", label="Stolz region")
    t = np.linspace(0, 2 * np.pi, 4097)
    img = eta.values(np.exp(1j * t))
    ax0.plot(img.real, img.imag, color="#c0392b", lw=1.0, label="eta on the circle")
    c = eps**2 * np.exp(1j * t)
    ax0.plot(c.real, c.imag, color="#555555", lw=0.8, ls="--", label="radius eps^2")
    ax0.set_aspect("equal")
    ax0.set_title(f"eps = {eps:g}")
    ax0.legend(loc="lower left", fontsize=8)

    rows = {**{f"d:{k}": v for k, v in result.distances.items()},
            **{f"c:{k}": v for k, v in result.chain.items()}}
    names = list(rows)
    rel = [rows[k]["slack"] / max(abs(rows[k]["target"]), 1e-300) for k in names]
    colors = ["#27ae60" if rows[k]["ok"] else "#c0392b" for k in names]
    ax1.barh(names, rel, color=colors)
    ax1.axvline(0.0, color="black", lw=0.8)
    ax1.set_xlabel("slack / target")
    ax1.tick_params(axis="y", labelsize=7)
    ax1.set_title("verified inequalities")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def map_svg(path, cmap) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    b = boundary_points(cmap.eps, 1024)
    ax.plot(b.real, b.imag, color="#2c3e50", lw=1.2)
    for r in (0.25, 0.5, 0.75, 0.9, 0.99):
        w = r * np.exp(1j * np.linspace(0, 2 * np.pi, 1025))
        z = cmap(w)
        ax.plot(z.real, z.imag, lw=0.7)
    ax.set_aspect("equal")
    ax.set_title(f"images of circles, eps = {cmap.eps:g}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
