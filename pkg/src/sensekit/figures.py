"""Matplotlib renderings for the report paths.

Each function writes PNG files into a directory and returns the written
paths; the CLI calls these when ``--figures`` is given so charts land next
to the delimited output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvaluationReport
from .iaa import IaaReport, METRIC_NAMES
from .model import EntityType, TokenClass
from .validation import CorpusStatistics, CoverageReport

_DPI = 150


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in text).strip("-").lower()


def save_stats_figures(stats: CorpusStatistics, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    written = []

    classes = list(TokenClass)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(
        [cls.value for cls in classes],
        [stats.per_class[cls].tokens for cls in classes],
        color="#4878a8",
    )
    ax.set_ylabel("tokens")
    ax.set_title("Tokens per class")
    ax.tick_params(axis="x", rotation=20)
    written.append(_save(fig, out_dir, "tokens_per_class.png"))

    if stats.entity_total.mentions:
        types = list(EntityType)
        width = 0.4
        positions = range(len(types))
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.bar(
            [p - width / 2 for p in positions],
            [stats.per_entity_type[t].mentions for t in types],
            width,
            label="mentions",
            color="#4878a8",
        )
        ax.bar(
            [p + width / 2 for p in positions],
            [stats.per_entity_type[t].tokens for t in types],
            width,
            label="tokens",
            color="#b8554f",
        )
        ax.set_xticks(list(positions))
        ax.set_xticklabels([t.value for t in types])
        ax.set_title("Entity mentions and tokens per type")
        ax.legend()
        written.append(_save(fig, out_dir, "entities_per_type.png"))
    return written


def save_coverage_figure(
    reports: Sequence[CoverageReport], out_dir: str | Path
) -> list[Path]:
    out_dir = Path(out_dir)
    kinds = ("lemmas", "senses excl. proper", "proper-noun senses")
    width = 0.8 / max(len(reports), 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    for index, report in enumerate(reports):
        ratios = (
            report.lemmas.ratio,
            report.senses_excluding_proper.ratio,
            report.proper_noun_senses.ratio,
        )
        offsets = [k + index * width for k in range(len(kinds))]
        ax.bar(offsets, [100 * r for r in ratios], width, label=report.inventory_id)
    ax.set_xticks([k + width * (len(reports) - 1) / 2 for k in range(len(kinds))])
    ax.set_xticklabels(kinds)
    ax.set_ylabel("% covered")
    ax.set_ylim(0, 100)
    ax.set_title("Inventory coverage of the annotated material")
    ax.legend()
    return [_save(fig, out_dir, "coverage.png")]


def save_iaa_figures(report: IaaReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for inventory_id in report.inventories():
        summary = report.summary(inventory_id)
        fig, (left, right) = plt.subplots(1, 2, figsize=(9, 4))
        kappa_names = [name for name in METRIC_NAMES if name.endswith("wk") or name == "kappa"]
        left.bar(
            kappa_names,
            [summary[name].mean for name in kappa_names],
            yerr=[summary[name].std for name in kappa_names],
            capsize=4,
            color="#4878a8",
        )
        left.set_ylim(0, 1.05)
        left.set_title("agreement (mean ± std)")
        error_names = [name for name in METRIC_NAMES if name in ("mae", "rmse")]
        right.bar(
            error_names,
            [summary[name].mean for name in error_names],
            yerr=[summary[name].std for name in error_names],
            capsize=4,
            color="#b8554f",
        )
        right.set_title("score error (mean ± std)")
        fig.suptitle(f"Inter-annotator agreement — {inventory_id}")
        written.append(_save(fig, out_dir, f"iaa_{_slug(inventory_id)}.png"))
    return written


def save_evaluation_figures(
    reports: Sequence[EvaluationReport], out_dir: str | Path
) -> list[Path]:
    """Top-1 accuracy against window size, one line per (scorer, inventory)."""
    out_dir = Path(out_dir)
    if not reports:
        return []
    by_series: dict[tuple[str, str], list[EvaluationReport]] = {}
    for report in reports:
        by_series.setdefault((report.scorer_identity, report.inventory_id), []).append(report)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (scorer_identity, inventory_id), series in sorted(by_series.items()):
        ordered = sorted(
            series, key=lambda r: (r.window_size is None, r.window_size or 0)
        )
        labels = [r.window_label for r in ordered]
        values = [100 * r.top_k_accuracy(1) for r in ordered]
        ax.plot(labels, values, marker="o", label=f"{scorer_identity} / {inventory_id}")
    ax.set_xlabel("window size")
    ax.set_ylabel("top-1 accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Top-1 accuracy by context window")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "top1_by_window.png")]
