"""CSV, JSON and figure output for result tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .runner import COLUMNS, ResultTable  # noqa: E402


def _fmt(x: float) -> str:
    return f"{x:.12e}"


def emit_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in table.rows:
            w.writerow(
                [
                    _fmt(r.epsilon),
                    r.k,
                    _fmt(r.sigma_k),
                    _fmt(r.certificate_bound),
                    r.certificate_kind,
                    _fmt(r.volume),
                    _fmt(r.runtime_ms),
                ]
            )
    return path


def emit_certificates(table: ResultTable, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(table.certificates(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def emit_svg(table: ResultTable, path) -> Path:
    """One panel per checked eigenvalue: sigma_k against 1/epsilon with its bound."""
    path = Path(path)
    keys = []
    for r in table.rows:
        if (r.k, r.certificate_kind) not in keys:
            keys.append((r.k, r.certificate_kind))
    fig, axes = plt.subplots(1, len(keys), figsize=(4.5 * len(keys), 3.6), squeeze=False)
    for ax, (k, kind) in zip(axes[0], keys):
        rows = sorted(table.select(k, kind), key=lambda r: -r.epsilon)
        x = [1.0 / r.epsilon for r in rows]
        ax.plot(x, [r.sigma_k for r in rows], "o-", color="C0", label=rf"$\sigma_{k}$")
        ax.plot(x, [r.certificate_bound for r in rows], "--", color="C3", label=kind.replace("_", " "))
        bad = [r for r in rows if not r.holds]
        if bad:
            ax.plot([1.0 / r.epsilon for r in bad], [r.sigma_k for r in bad], "x", color="k", ms=9, label="violated")
        ax.set_xlabel(r"$1/\varepsilon$")
        ax.set_ylabel(rf"$\sigma_{k}$")
        ax.legend(frameon=False, fontsize=8)
        ax.grid(alpha=0.3)
    fig.suptitle(table.name, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_ratio_csv(report: dict, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "j", "ratio", "A", "lower", "upper"])
        for t in report["trials"]:
            A, e = t["A"], t["exponent"]
            for j, ratio in enumerate(t["ratios"], start=2):
                w.writerow([t["trial"], j, _fmt(ratio), _fmt(A), _fmt(A**-e), _fmt(A**e)])
    return path


def emit_report_json(report: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
