"""Figure rendering for the CLI: one PNG next to each CSV.

The CSV stays the stable artifact; these plots are a convenience view of the
same numbers.  Simulation evaluators draw as markers, analytical ones as
lines, the usual way to show a simulation validating a formula.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "exact": dict(linestyle="none", marker="o", markersize=5),
    "approx": dict(linestyle="-", marker=""),
    "limit": dict(linestyle="--", marker=""),
}
_LABEL = {"exact": "simulation", "approx": "closed form", "limit": "large-M limit"}
_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:purple", "tab:orange")


def render_sweep(points, png_path, x_label, title=None, logx=True):
    """Sum SE versus the sweep variable.

    points: iterable of dicts with keys x, y, evaluator, and optional group;
    one series is drawn per (group, evaluator), groups sharing a color.
    """
    series = {}
    for pt in points:
        key = (pt.get("group"), pt["evaluator"])
        xs, ys = series.setdefault(key, ([], []))
        xs.append(pt["x"])
        ys.append(pt["y"])
    groups = sorted({g for g, _ in series}, key=str)
    color_of = {g: _COLORS[i % len(_COLORS)] for i, g in enumerate(groups)}

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (group, evaluator), (xs, ys) in series.items():
        label = _LABEL.get(evaluator, evaluator)
        if group is not None:
            label = f"{label}, {group}"
        ax.plot(xs, ys, label=label, color=color_of[group],
                **_STYLE.get(evaluator, {}))
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(x_label)
    ax.set_ylabel("sum SE (bits/s/Hz)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_report(per_pair, png_path, title=None):
    """Per-pair rates for one configuration, exact next to closed form.

    per_pair: {evaluator: sequence of per-pair rates}.
    """
    evaluators = list(per_pair)
    n = len(next(iter(per_pair.values())))
    width = 0.8 / max(len(evaluators), 1)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    x = np.arange(n, dtype=float)
    for idx, evaluator in enumerate(evaluators):
        ax.bar(x + (idx - (len(evaluators) - 1) / 2) * width,
               per_pair[evaluator], width,
               label=_LABEL.get(evaluator, evaluator),
               color=_COLORS[idx % len(_COLORS)], alpha=0.85)
    ax.set_xticks(x, [f"pair {i + 1}" for i in range(n)])
    ax.set_ylabel("per-pair SE (bits/s/Hz)")
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
