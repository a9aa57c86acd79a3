"""Figures written next to the text reports.

Only the Agg backend is used, so rendering works headless. Figures carry no
timestamps; re-rendering the same result gives the same file.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .game import GameResult  # noqa: E402
from .norms import Compliance, ComplianceReport  # noqa: E402

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
    "svg.hashsalt": "normlogic",
}

# one colour per compliance status, ordered as in the legend
STATUS_COLOURS = {
    Compliance.SATISFIED: "#4c9f70",
    Compliance.VIOLATED: "#c8553d",
    Compliance.NOT_APPLICABLE: "#d9d9d9",
    Compliance.PERMISSION_GRANTED: "#6c8ebf",
    Compliance.REASON_GENERATED: "#e0b04a",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {".png": {"Software": None},
                ".pdf": {"CreationDate": None, "ModDate": None},
                ".svg": {"Date": None}}.get(path.suffix.lower(), {})
    fig.savefig(path, bbox_inches="tight", metadata=metadata)
    plt.close(fig)
    return path


def plot_game(result: GameResult, path: str | Path) -> Path:
    """Grouped bars of correct, errors and net score per agent and phase."""
    with plt.rc_context(STYLE):
        n = len(result.phases)
        fig, axes = plt.subplots(1, n, figsize=(3.4 * n, 2.8), squeeze=False, sharey=True)
        for ax, phase in zip(axes[0], result.phases):
            names = [o.name for o in phase.outcomes]
            x = np.arange(len(names))
            width = 0.26
            correct = [o.score.correct for o in phase.outcomes]
            errors = [o.score.errors for o in phase.outcomes]
            net = [o.score.net for o in phase.outcomes]
            ax.bar(x - width, correct, width, label="correct", color="#4c9f70")
            ax.bar(x, errors, width, label="errors", color="#c8553d")
            ax.bar(x + width, net, width, label="net", color="#3b5b92")
            ax.axhline(0, color="black", linewidth=0.6)
            ax.set_xticks(x)
            ax.set_xticklabels(names)
            w = phase.world
            ax.set_title(f"{phase.label}: {w.attribute} {w.positive}-{w.negative}")
            ax.text(0.02, 0.96, f"winner: {phase.winner}", transform=ax.transAxes,
                    va="top", fontsize=8)
        axes[0][0].set_ylabel("individuals")
        axes[0][-1].legend(loc="lower right")
        fig.tight_layout()
        return _save(fig, path)


def plot_bridge_matrix(reports: list[ComplianceReport], path: str | Path) -> Path:
    """Scope-by-form grid coloured by compliance status."""
    from matplotlib.colors import ListedColormap
    from matplotlib.patches import Patch

    statuses = list(STATUS_COLOURS)
    scopes = ["C", "B", "W"]
    columns = [f"{m}{p}" for m in "opr" for p in "+-"]
    grid = np.zeros((len(scopes), len(columns)), dtype=int)
    for r in reports:
        row = scopes.index(r.form.scope.value)
        col = columns.index(r.form.name[1:])
        grid[row, col] = statuses.index(r.status)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.2, 2.4))
        cmap = ListedColormap([STATUS_COLOURS[s] for s in statuses])
        ax.imshow(grid, cmap=cmap, vmin=-0.5, vmax=len(statuses) - 0.5, aspect="auto")
        ax.set_xticks(range(len(columns)))
        ax.set_xticklabels(columns)
        ax.set_yticks(range(len(scopes)))
        ax.set_yticklabels(scopes)
        ax.set_xlabel("modality / polarity")
        ax.set_ylabel("scope")
        for (i, j), k in np.ndenumerate(grid):
            ax.text(j, i, statuses[k].value[:4], ha="center", va="center", fontsize=7)
        handles = [Patch(color=STATUS_COLOURS[s], label=s.value) for s in statuses]
        ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.01, 1.0))
        for spine in ax.spines.values():
            spine.set_visible(False)
        fig.tight_layout()
        return _save(fig, path)


def plot_closure_growth(sizes: tuple[int, ...], path: str | Path) -> Path:
    """Closure cardinality per depth on a log scale."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.4, 2.6))
        depths = np.arange(len(sizes))
        ax.semilogy(depths, sizes, marker="o", color="#3b5b92")
        ax.set_xticks(depths)
        ax.set_xlabel("depth")
        ax.set_ylabel("formulas")
        fig.tight_layout()
        return _save(fig, path)
