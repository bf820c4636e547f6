"""Report figures rendered next to the evaluation CSV.

Two views of one evaluation run: the signed-energy histogram, which should
show the machine-generated population entirely left of zero and the human
population right of it, and the confusion matrix behind the TPR/TNR
numbers.  Rendering is headless (Agg); every function writes a PNG and
returns its path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_LABEL_NAMES = {0: "machine", 1: "human"}
_COLORS = {0: "#c0392b", 1: "#2866a8"}


def _new_axes(width: float = 6.4, height: float = 4.2):
    fig, ax = plt.subplots(figsize=(width, height), dpi=120)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def save_energy_histogram(rows, path) -> str:
    """Histogram of signed energies, one color per predicted label.

    ``rows`` are evaluation rows whose fields 2 and 4 are predicted label
    and signed energy (the energies-CSV column order).
    """
    preds = np.array([r[2] for r in rows], dtype=np.int64)
    energies = np.array([r[4] for r in rows], dtype=np.float64)
    fig, ax = _new_axes()
    if energies.size:
        lo, hi = energies.min(), energies.max()
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        bins = np.linspace(lo, hi, 61)
        for lab in (0, 1):
            sel = energies[preds == lab]
            if sel.size:
                ax.hist(sel, bins=bins, alpha=0.75, color=_COLORS[lab],
                        label=f"predicted {_LABEL_NAMES[lab]} ({lab})")
        ax.axvline(0.0, color="black", linewidth=0.8, linestyle="--")
        ax.legend(frameon=False)
    ax.set_xlabel("signed energy")
    ax.set_ylabel("samples")
    ax.set_title("Signed energy by predicted label")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def save_confusion_matrix(summary, path) -> str:
    """2x2 confusion heatmap; rows are true labels, columns predictions."""
    counts = np.array([[summary.tp, summary.fn],
                       [summary.fp, summary.tn]], dtype=np.float64)
    fig, ax = plt.subplots(figsize=(4.6, 4.0), dpi=120)
    ax.imshow(counts, cmap="Blues", vmin=0.0)
    for i in range(2):
        for j in range(2):
            ax.text(j, i, f"{int(counts[i, j])}", ha="center", va="center",
                    fontsize=14,
                    color="white" if counts[i, j] > counts.max() / 2 else "black")
    ax.set_xticks([0, 1], [f"pred {_LABEL_NAMES[0]}", f"pred {_LABEL_NAMES[1]}"])
    ax.set_yticks([0, 1], [f"true {_LABEL_NAMES[0]}", f"true {_LABEL_NAMES[1]}"])
    ax.set_title(f"TPR {summary.tpr:.3f}   TNR {summary.tnr:.3f}")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return str(path)
