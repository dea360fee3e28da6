"""Agreement metrics over paired category scores from two annotators.

The kappa family is chance-corrected: observed (dis)agreement is compared
with what two independent annotators with the same marginal score
frequencies would produce. The plain kappa first collapses scores to the
correct/incorrect split at the 60-percent threshold; the weighted variants
keep all six categories, place them on the 0..5 ordinal scale, and charge
each disagreement cell (i, j) a weight

    linear:     |y_i - y_j| / (K - 1)
    quadratic:  (y_i - y_j)^2 / (K - 1)^2

with K = 6, so kappa = 1 - (weighted observed mass) / (weighted expected
mass) where expected cell counts are row_i * col_j / n. MAE and RMSE skip
chance correction and work directly on the 1..100 numeric score values.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateMarginals
from .model import (
    NUM_CATEGORIES,
    SYSTEM_INVENTORY_ID,
    ScoreCategory,
    ScoredSenseAnnotation,
    dedupe_annotations,
)

# One observation: the two annotators' categories for the same (token
# occurrence, sense) item.
PairedScores = Sequence[tuple[ScoreCategory, ScoreCategory]]


class Weighting(enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class ErrorMetric(enum.Enum):
    MAE = "mae"
    RMSE = "rmse"


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """K x K observed-count matrix; rows = first annotator, cols = second."""

    observed: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: PairedScores) -> "ContingencyTable":
        observed = np.zeros((NUM_CATEGORIES, NUM_CATEGORIES), dtype=float)
        rows = np.fromiter((a.ordinal for a, _ in pairs), dtype=int, count=len(pairs))
        cols = np.fromiter((b.ordinal for _, b in pairs), dtype=int, count=len(pairs))
        np.add.at(observed, (rows, cols), 1.0)
        return cls(observed)

    @property
    def n(self) -> float:
        return float(self.observed.sum())

    @property
    def row_marginals(self) -> np.ndarray:
        return self.observed.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.observed.sum(axis=0)

    @property
    def expected(self) -> np.ndarray:
        """Cell counts under independent annotators with these marginals."""
        return np.outer(self.row_marginals, self.col_marginals) / self.n


def weight_matrix(weighting: Weighting) -> np.ndarray:
    """Disagreement weights over ordinal index pairs; zero on the diagonal."""
    indices = np.arange(NUM_CATEGORIES, dtype=float)
    diff = np.subtract.outer(indices, indices)
    if weighting is Weighting.LINEAR:
        return np.abs(diff) / (NUM_CATEGORIES - 1)
    if weighting is Weighting.QUADRATIC:
        return diff**2 / (NUM_CATEGORIES - 1) ** 2
    raise ValueError(f"unknown weighting {weighting!r}")


def _require_pairs(pairs: PairedScores) -> None:
    if len(pairs) == 0:
        raise ValueError("at least one paired observation is required")


def cohen_kappa_thresholded(pairs: PairedScores) -> float:
    """Cohen's kappa on the correct/incorrect split at the 60 threshold."""
    _require_pairs(pairs)
    n = len(pairs)
    both_correct = both_wrong = a_correct_total = b_correct_total = 0
    for a, b in pairs:
        ac, bc = a.is_correct(), b.is_correct()
        a_correct_total += ac
        b_correct_total += bc
        both_correct += ac and bc
        both_wrong += (not ac) and (not bc)
    observed = (both_correct + both_wrong) / n
    expected = (
        a_correct_total * b_correct_total
        + (n - a_correct_total) * (n - b_correct_total)
    ) / (n * n)
    if expected == 1.0:
        if observed == 1.0:
            return 1.0
        raise DegenerateMarginals(
            "expected agreement is 1 but the annotators disagree"
        )
    return (observed - expected) / (1.0 - expected)


def weighted_kappa(pairs: PairedScores, weighting: Weighting) -> float:
    """Weighted kappa over the six ordinal categories.

    Returns exactly 1.0 iff the observed disagreement mass is zero. When
    the expected disagreement mass is also zero (both annotators stuck to
    one identical category) the statistic is taken as 1.0; degenerate
    disagreement under zero expectation raises :class:`DegenerateMarginals`.
    """
    _require_pairs(pairs)
    table = ContingencyTable.from_pairs(pairs)
    weights = weight_matrix(weighting)
    observed_mass = float((weights * table.observed).sum())
    expected_mass = float((weights * table.expected).sum())
    if expected_mass == 0.0:
        if observed_mass == 0.0:
            return 1.0
        raise DegenerateMarginals(
            "expected disagreement mass is zero but the annotators disagree"
        )
    return 1.0 - observed_mass / expected_mass


def score_error(pairs: PairedScores, metric: ErrorMetric) -> float:
    """MAE or RMSE between the two annotators' numeric score values."""
    _require_pairs(pairs)
    diffs = np.fromiter(
        (a.value - b.value for a, b in pairs), dtype=float, count=len(pairs)
    )
    if metric is ErrorMetric.MAE:
        return float(np.mean(np.abs(diffs)))
    if metric is ErrorMetric.RMSE:
        return float(np.sqrt(np.mean(diffs**2)))
    raise ValueError(f"unknown error metric {metric!r}")


# --- pairing and reports -------------------------------------------------------

def paired_scores(
    annotations: Iterable[ScoredSenseAnnotation],
    annotator_a: str,
    annotator_b: str,
    inventory_id: str,
) -> tuple[list[tuple[ScoreCategory, ScoreCategory]], int]:
    """Align two annotators' scores on shared (occurrence, sense) items.

    Returns the paired observations (in deterministic item order) plus the
    count of items only one of the two scored, which are excluded.
    """
    by_item: dict[tuple[str, int, str], dict[str, ScoreCategory]] = {}
    for annotation in dedupe_annotations(annotations):
        if annotation.inventory_id != inventory_id:
            continue
        if annotation.annotator_id not in (annotator_a, annotator_b):
            continue
        item = (annotation.sentence_id, annotation.token_position, annotation.sense_id)
        by_item.setdefault(item, {})[annotation.annotator_id] = annotation.category
    pairs: list[tuple[ScoreCategory, ScoreCategory]] = []
    unpaired = 0
    for item in sorted(by_item):
        scores = by_item[item]
        if annotator_a in scores and annotator_b in scores:
            pairs.append((scores[annotator_a], scores[annotator_b]))
        else:
            unpaired += 1
    return pairs, unpaired


METRIC_NAMES = ("kappa", "lwk", "qwk", "mae", "rmse")


@dataclass(frozen=True)
class PairAgreement:
    """All five metrics for one annotator pair in one inventory."""

    annotator_a: str
    annotator_b: str
    inventory_id: str
    paired_items: int
    unpaired_items: int
    kappa: float
    lwk: float
    qwk: float
    mae: float
    rmse: float

    def metric(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class MetricSummary:
    values: tuple[float, ...]
    mean: float
    std: float  # population standard deviation across pairs


@dataclass(frozen=True)
class IaaReport:
    pair_results: tuple[PairAgreement, ...]

    def inventories(self) -> list[str]:
        return sorted({r.inventory_id for r in self.pair_results})

    def results_for(self, inventory_id: str) -> list[PairAgreement]:
        return [r for r in self.pair_results if r.inventory_id == inventory_id]

    def summary(self, inventory_id: str) -> dict[str, MetricSummary]:
        results = self.results_for(inventory_id)
        if not results:
            raise ValueError(f"no pair results for inventory {inventory_id!r}")
        out: dict[str, MetricSummary] = {}
        for name in METRIC_NAMES:
            values = tuple(r.metric(name) for r in results)
            out[name] = MetricSummary(
                values=values,
                mean=float(np.mean(values)),
                std=float(np.std(values)),
            )
        return out


def pair_agreement(
    annotations: Iterable[ScoredSenseAnnotation],
    annotator_a: str,
    annotator_b: str,
    inventory_id: str,
) -> PairAgreement:
    """Compute the full metric set for one annotator pair; fails on no overlap."""
    pairs, unpaired = paired_scores(annotations, annotator_a, annotator_b, inventory_id)
    if not pairs:
        raise ValueError(
            f"annotators {annotator_a!r} and {annotator_b!r} share no scored items "
            f"in inventory {inventory_id!r}"
        )
    try:
        return PairAgreement(
            annotator_a=annotator_a,
            annotator_b=annotator_b,
            inventory_id=inventory_id,
            paired_items=len(pairs),
            unpaired_items=unpaired,
            kappa=cohen_kappa_thresholded(pairs),
            lwk=weighted_kappa(pairs, Weighting.LINEAR),
            qwk=weighted_kappa(pairs, Weighting.QUADRATIC),
            mae=score_error(pairs, ErrorMetric.MAE),
            rmse=score_error(pairs, ErrorMetric.RMSE),
        )
    except DegenerateMarginals as exc:
        raise DegenerateMarginals(
            f"pair ({annotator_a}, {annotator_b}), inventory {inventory_id}: {exc}"
        ) from exc


def iaa_report(
    annotations: Iterable[ScoredSenseAnnotation],
    annotator_pairs: Sequence[tuple[str, str]] | None = None,
    inventory_ids: Sequence[str] | None = None,
) -> IaaReport:
    """Per-pair metrics plus mean/std summaries, per inventory.

    With ``annotator_pairs`` omitted, every unordered pair of annotators
    sharing at least one scored item is included; an explicitly requested
    pair with no overlap is an error.
    """
    annotations = dedupe_annotations(annotations)
    explicit_pairs = annotator_pairs is not None
    if inventory_ids is None:
        inventory_ids = sorted(
            {a.inventory_id for a in annotations} - {SYSTEM_INVENTORY_ID}
        )
    if annotator_pairs is None:
        annotators = sorted({a.annotator_id for a in annotations})
        annotator_pairs = list(itertools.combinations(annotators, 2))

    results: list[PairAgreement] = []
    for inventory_id in inventory_ids:
        for annotator_a, annotator_b in annotator_pairs:
            if explicit_pairs:
                results.append(
                    pair_agreement(annotations, annotator_a, annotator_b, inventory_id)
                )
            else:
                pairs, _ = paired_scores(annotations, annotator_a, annotator_b, inventory_id)
                if pairs:
                    results.append(
                        pair_agreement(annotations, annotator_a, annotator_b, inventory_id)
                    )
    if not results:
        raise ValueError("no double-annotated items found")
    return IaaReport(tuple(results))
