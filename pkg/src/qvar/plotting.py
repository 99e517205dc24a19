"""PNG figures for the CLI reports (CDF/PDF tables, coefficient decay, MC fits)."""

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (6.0, 3.7)


def _axes(ncols=1):
    fig, axes = plt.subplots(1, ncols, figsize=(FIGSIZE[0] * ncols, FIGSIZE[1]))
    axes = np.atleast_1d(axes)
    for ax in axes:
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
    return fig, axes


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_table(table, path, title=None):
    """CDF, and the density when present, against x."""
    fig, axes = _axes(2 if table.f is not None else 1)
    axes[0].plot(table.grid, table.F, "k-", lw=1.2)
    axes[0].set_xlabel("x")
    axes[0].set_ylabel("F(x)")
    axes[0].set_xlim(0, table.q)
    if table.f is not None:
        axes[1].plot(table.grid, table.f, "C0-", lw=1.2)
        axes[1].set_xlabel("x")
        axes[1].set_ylabel("f(x)")
        axes[1].set_xlim(0, table.q)
    if title:
        axes[0].set_title(title)
    return _save(fig, path)


def plot_coefficients(coeffs, path, title=None):
    """|Im f(t_k)| on log-log axes."""
    fig, axes = _axes()
    k = np.arange(1, coeffs.K + 1)
    axes[0].loglog(k, np.abs(coeffs.im) + 1e-300, "k.", ms=3)
    axes[0].set_xlabel("k")
    axes[0].set_ylabel("|Im f(t_k)|")
    if title:
        axes[0].set_title(title)
    return _save(fig, path)


def plot_mc(table, mc, path, title=None):
    """Exact CDF over the empirical CDF of the Monte Carlo sample."""
    fig, axes = _axes()
    step = max(1, mc.N // 2000)
    xs = mc.samples[::step]
    axes[0].plot(xs, mc.ecdf(xs), "C1-", lw=2.5, alpha=0.6, label="empirical")
    axes[0].plot(table.grid, table.F, "k-", lw=1.0, label="exact")
    axes[0].set_xlabel("x")
    axes[0].set_ylabel("F(x)")
    axes[0].set_xlim(0, table.q)
    axes[0].legend(frameon=False)
    if title:
        axes[0].set_title(title)
    return _save(fig, path)
