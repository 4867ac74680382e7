"""Optional matplotlib figures for the CLI report path.

matplotlib is imported lazily with the Agg backend so the rest of the package
never needs it.  Each function takes the same rows the CLI serializes and
writes one image file.
"""

from __future__ import annotations

import math
from collections import defaultdict


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("figures need matplotlib (pip install artifact[plot])") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 10, "axes.grid": True, "grid.alpha": 0.3,
                         "svg.hashsalt": "tumorbif", "savefig.dpi": 120})
    return plt


def _save(fig, path):
    # fixed metadata keeps png/svg output byte-stable between runs
    meta = {"Software": None} if str(path).endswith(".png") else {"Date": None}
    fig.tight_layout()
    fig.savefig(path, metadata=meta)


def stability_figure(rows, path):
    plt = _pyplot()
    eps = [r["eps"] for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
    for ax, key, title in zip(axes, ("axisym_rate", "full_rate"),
                              ("axisymmetric", "non-radially symmetric")):
        vals = [r[key] for r in rows]
        ax.axhline(0.0, color="k", lw=0.8)
        ax.axvline(0.0, color="k", lw=0.8, ls=":")
        ax.plot(eps, vals, "o-", ms=3)
        ax.fill_between(eps, 0, vals, where=[v >= 0 for v in vals], interpolate=True,
                        color="tab:red", alpha=0.2, label="unstable")
        ax.xaxis.set_major_locator(plt.MaxNLocator(5))
        ax.set_title(title)
        ax.set_xlabel(r"$\varepsilon$ (first order)")
    axes[0].set_ylabel("leading rate of $-H$")
    axes[0].legend(loc="upper center")
    _save(fig, path)
    plt.close(fig)


def modes_figure(rows, path):
    plt = _pyplot()
    series = defaultdict(list)
    for r in rows:
        series[(r["n"], r["m"])].append((r["t"], r["amplitude"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for (n, m), pts in sorted(series.items()):
        t, a = zip(*pts)
        if all(abs(x) > 0 for x in a):
            ax.semilogy(t, [abs(x) for x in a], label=f"$Y_{{{n},{m}}}$")
    ax.set_xlabel("t")
    ax.set_ylabel("|amplitude|")
    if len(series) <= 12:
        ax.legend(fontsize=8)
    _save(fig, path)
    plt.close(fig)


def slope_figure(rows, path):
    plt = _pyplot()
    by_beta = defaultdict(list)
    for r in rows:
        by_beta[r["beta"]].append((r["sigma_tilde"], r["slope"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for beta, pts in sorted(by_beta.items()):
        s, v = zip(*sorted(pts))
        ax.plot(s, [-x for x in v], "o-", ms=3, label=rf"$\beta={beta:g}$")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\tilde\sigma$")
    ax.set_ylabel(r"$-\mu_2'(0)$")
    ax.legend(fontsize=8)
    _save(fig, path)
    plt.close(fig)


def bifurcation_figure(rows, path):
    plt = _pyplot()
    pts = [(r["n"], r["mu_n"]) for r in rows if r.get("mu_n") is not None
           and isinstance(r["mu_n"], float) and math.isfinite(r["mu_n"])]
    fig, ax = plt.subplots(figsize=(6, 4))
    if pts:
        n, mu = zip(*pts)
        ax.semilogy(n, mu, "o-")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$\mu_n$")
    _save(fig, path)
    plt.close(fig)


def g1_figure(r_rows, path):
    plt = _pyplot()
    pts = sorted((r["R"], r["G1"]) for r in r_rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    if pts:
        rr, g = zip(*pts)
        ax.loglog(rr, [-x for x in g], ".-")
    ax.set_xlabel("R")
    ax.set_ylabel(r"$-G_1(R)$")
    _save(fig, path)
    plt.close(fig)


def stationary_figure(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r["r"] for r in rows], [r["sigma_s"] for r in rows], label=r"$\sigma_s$")
    ax2 = ax.twinx()
    ax2.plot([r["r"] for r in rows], [r["p_s"] for r in rows], color="tab:orange", label="$p_s$")
    ax.set_xlabel("r")
    ax.set_ylabel(r"$\sigma_s$")
    ax2.set_ylabel("$p_s$")
    _save(fig, path)
    plt.close(fig)
