"""Figure rendering for sweep reports (PNG files next to the CSV output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def sweep_figure(report: dict, path) -> Path:
    rows = report["rows"]
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(ns, [r["apq"] for r in rows], "o-", label="weight constant")
    if "strong_ratio" in rows[0]:
        ax.plot(ns, [r["strong_ratio"] for r in rows], "s-", label="strong ratio")
        ax.plot(ns, [r["weak_ratio"] for r in rows], "^-", label="weak ratio")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("points n")
    ax.set_ylabel("value")
    verdict = report.get("verdict", {})
    ax.set_title(f"{report['experiment']} sweep: {verdict.get('ratio_class', '')}".strip())
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def necessity_figure(report: dict, path) -> Path:
    rows = report["rows"]
    ns = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(ns, [r["apq"] for r in rows], "o-", label="weight constant")
    ax.plot(ns, [r["lower_bound"] for r in rows], "s-", label="extremal lower bound")
    ax.plot(ns, [r["c_nec"] for r in rows], "^--", label="necessity constant")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("points n")
    ax.set_ylabel("value")
    ax.set_title("necessity: constant vs extremal lower bound")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
