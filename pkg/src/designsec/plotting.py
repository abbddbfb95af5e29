"""Report figures: training curves and actual-vs-expected outputs.

Figures are written with the Agg backend and without timestamp metadata so
repeated runs produce identical files.
"""

from __future__ import annotations

import os
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .classifier import EvalReport  # noqa: E402
from .mlp import TrainReport  # noqa: E402

PathLike = Union[str, os.PathLike]

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "designsec",
}

_META = {"png": {"Software": None}, "pdf": {"Creator": None, "Producer": None, "CreationDate": None}, "svg": {"Date": None}}


def _save(fig, path: PathLike) -> None:
    ext = os.fspath(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, dpi=120, metadata=_META.get(ext))
    plt.close(fig)


def plot_training_curve(report: TrainReport, path: PathLike, title: str = "") -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        epochs = range(1, len(report.train_mse) + 1)
        ax.semilogy(epochs, report.train_mse, label="train", color="#1f4e79", lw=1.2)
        if report.val_mse:
            ax.semilogy(epochs, report.val_mse, label="validation", color="#c55a11", lw=1.2)
        if report.best_epoch:
            ax.axvline(report.best_epoch, color="0.5", ls=":", lw=0.8, label=f"best epoch {report.best_epoch}")
        ax.set_xlabel("epoch")
        ax.set_ylabel("MSE")
        ax.set_title(title or f"stopped: {report.stop_reason}")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_actual_vs_expected(report: EvalReport, path: PathLike) -> None:
    """Expected pattern ID and raw network output per test sample."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 3.6))
        xs = range(1, len(report.rows) + 1)
        expected = [r.expected_id for r in report.rows]
        actual = [r.raw for r in report.rows]
        ax.plot(xs, expected, "o", ms=4, mfc="none", color="#1f4e79", label="expected")
        ax.plot(xs, actual, "x", ms=4, color="#c55a11", label="actual")
        wrong = [(i, r.raw) for i, r in zip(xs, report.rows) if not r.correct]
        if wrong:
            wx, wy = zip(*wrong)
            ax.plot(wx, wy, "s", ms=8, mfc="none", color="#a50f15", lw=0.8, label="misclassified")
        ax.set_xlabel("test sample")
        ax.set_ylabel("attack pattern ID")
        ax.set_title(f"actual vs expected output (accuracy {report.overall:.4f})")
        ax.legend(frameon=False, loc="upper left")
        fig.tight_layout()
        _save(fig, path)


def plot_all_curves(reports: Sequence[TrainReport], out_dir: PathLike) -> list[str]:
    paths = []
    for k, rep in enumerate(reports):
        path = os.path.join(out_dir, f"mse_partition{k}.png")
        plot_training_curve(rep, path, title=f"partition {k}: {rep.stop_reason} at epoch {rep.stopped_at_epoch}")
        paths.append(path)
    return paths
