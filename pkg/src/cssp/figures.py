"""Figure rendering for experiment reports (error-ratio curves and the
bound comparison), written next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _curve_groups(report) -> dict[str, list[dict]]:
    groups: dict[str, list[dict]] = {}
    for curve in report.curves:
        groups.setdefault(curve["algorithm"], []).append(curve)
    for members in groups.values():
        members.sort(key=lambda c: c["round"])
    return groups


def render_curves(report, path) -> Path:
    """Mean error ratio vs. round, one line per algorithm with a std band."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, members in sorted(_curve_groups(report).items()):
        rounds = [c["round"] for c in members]
        means = [c["mean_ratio"] for c in members]
        stds = [c["std_ratio"] for c in members]
        ax.errorbar(rounds, means, yerr=stds, marker="o", capsize=3, label=name)
    ax.set_xlabel("sampling round")
    ax.set_ylabel("relative error ratio")
    ax.axhline(1.0, color="gray", lw=0.8, ls=":")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_bound(report, path) -> Path:
    """Empirical mean squared error against the theoretical bound per round."""
    groups: dict[str, list[dict]] = {}
    for entry in report.bound:
        groups.setdefault(entry["algorithm"], []).append(entry)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, members in sorted(groups.items()):
        members.sort(key=lambda e: e["round"])
        rounds = [e["round"] for e in members]
        ax.plot(rounds, [e["mean_sq_residual"] for e in members], marker="o", label=f"{name} empirical")
        ax.plot(rounds, [e["bound_sq"] for e in members], ls="--", label=f"{name} bound")
    ax.set_xlabel("sampling round")
    ax.set_ylabel("squared reconstruction error")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
