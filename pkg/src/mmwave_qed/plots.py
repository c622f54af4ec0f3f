"""Minimal SVG emitters (heat maps, scatter, line plots). Headless only."""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "mmwave-qed"  # stable ids across reruns

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

__all__ = ["theta_heatmap_svg", "iq_scatter_svg", "calibration_svg", "lines_svg"]

_FLOOR = 1e-4  # log-scale hybridization floor for rendering


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def theta_heatmap_svg(path, omega_d, xi, theta, title=""):
    """Log-scaled hybridization over (omega_d, xi^2); theta shape (n_wd, n_xi)."""
    z = np.clip(np.asarray(theta), _FLOOR, 1.0)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    mesh = ax.pcolormesh(
        np.asarray(omega_d),
        np.asarray(xi) ** 2,
        z.T,
        norm=LogNorm(vmin=_FLOOR, vmax=1.0),
        cmap="magma",
        shading="nearest",
    )
    ax.set_xlabel("drive frequency (GHz)")
    ax.set_ylabel(r"$\xi^2$")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label=r"$\Theta$")
    fig.tight_layout()
    _save(fig, path)


def iq_scatter_svg(path, shot_sets, separatrix=None, title=""):
    """Scatter of (I, Q) clouds; shot_sets is a list of (i, q, label)."""
    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    for i_vals, q_vals, label in shot_sets:
        ax.plot(i_vals, q_vals, ".", ms=1.2, alpha=0.45, label=str(label), rasterized=True)
    if separatrix is not None:
        angle = np.linspace(0, 2 * np.pi, 181)
        cx, cy = separatrix.center
        ax.plot(cx + separatrix.radius * np.cos(angle), cy + separatrix.radius * np.sin(angle), "k-", lw=1)
    ax.set_xlabel("I")
    ax.set_ylabel("Q")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    leg = ax.legend(markerscale=8, fontsize=8)
    for h in leg.legend_handles:
        h.set_alpha(1.0)
    fig.tight_layout()
    _save(fig, path)


def lines_svg(path, x, series, xlabel="", ylabel="", title="", logy=False):
    """Plain multi-line plot; series is a list of (y, label)."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    for y, label in series:
        ax.plot(x, y, "-", lw=1.2, label=str(label))
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def calibration_svg(path, amplitudes, photons, fit, title=""):
    """Calibration points and the fitted quadratic, through the origin."""
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(amplitudes, photons, "o", ms=4, label="measured")
    a_grid = np.linspace(0, float(np.max(amplitudes)) * 1.1, 200)
    ax.plot(a_grid, fit.a * a_grid**2, "-", label=f"fit a={fit.a:.4g}")
    ax.set_xlabel("drive amplitude (arb.)")
    ax.set_ylabel("drive photons")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
