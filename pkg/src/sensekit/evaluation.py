"""Corpus-level evaluation of the disambiguation pipeline: top-k accuracy
with per-class breakdowns and explicit skip accounting.

A prediction at rank k is correct iff any of the top-k ranked senses has a
reference category at or above the correctness threshold. The headline
accuracies cover nouns and verbs; function words are evaluated and
reported separately; digits, punctuation, entity-mention tokens, and
lemma misses are never scored against the scorer — they are counted as
skipped so that evaluated + skipped always equals the corpus token count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import IncompleteGold, InvalidScoreValue, LemmaNotFound, MissingGoldLemma, WorkbenchError
from .model import (
    CORRECTNESS_THRESHOLD,
    Corpus,
    EntityMention,
    ScoredSenseAnnotation,
    SCORE_VALUES,
    SenseInventory,
    TokenClass,
    dedupe_annotations,
)
from .wsd import (
    LemmaMode,
    TargetMarkup,
    VALID_WINDOW_SIZES,
    build_pairs,
    extract_window,
    lookup_candidate_glosses,
    rank_glosses,
    score_pairs,
)

TOP_K = (1, 2, 3)


class SkipReason(enum.Enum):
    DIGITS_PUNCTUATION = "digits_punctuation"
    ENTITY_TOKEN = "entity_token"
    LEMMA_MISS = "lemma_miss"
    NO_CANDIDATES = "no_candidates"
    NO_GOLD_SENSE = "no_gold_sense"
    FUNCTION_WORD_EXCLUDED = "function_word_excluded"


@dataclass(frozen=True)
class EvaluationConfig:
    inventory_id: str
    window_size: int | None = 11
    markup: TargetMarkup | None = None  # None -> the scorer's preferred markup
    lemma_mode: LemmaMode = LemmaMode.GOLD
    correctness_threshold: int = CORRECTNESS_THRESHOLD
    include_function_words: bool = True

    def __post_init__(self) -> None:
        if self.correctness_threshold not in SCORE_VALUES:
            raise InvalidScoreValue(
                f"correctness_threshold must be one of {SCORE_VALUES}, "
                f"got {self.correctness_threshold!r}"
            )
        if self.window_size is not None and self.window_size not in VALID_WINDOW_SIZES:
            raise ValueError(
                f"window_size must be None or one of {VALID_WINDOW_SIZES}, "
                f"got {self.window_size!r}"
            )


@dataclass
class ClassOutcome:
    evaluated: int = 0
    top1_correct: int = 0

    @property
    def top1_accuracy(self) -> float:
        return self.top1_correct / self.evaluated if self.evaluated else 0.0


_HEADLINE_CLASSES = (TokenClass.NOUN, TokenClass.VERB)
_EVALUATED_CLASSES = (TokenClass.NOUN, TokenClass.VERB, TokenClass.FUNCTION_WORD)


@dataclass
class EvaluationReport:
    inventory_id: str
    scorer_identity: str
    window_size: int | None
    markup: TargetMarkup
    lemma_mode: LemmaMode
    correctness_threshold: int
    total_tokens: int = 0
    headline_evaluated: int = 0
    headline_correct: dict[int, int] = field(
        default_factory=lambda: {k: 0 for k in TOP_K}
    )
    per_class: dict[TokenClass, ClassOutcome] = field(
        default_factory=lambda: {cls: ClassOutcome() for cls in _EVALUATED_CLASSES}
    )
    skipped: dict[SkipReason, int] = field(
        default_factory=lambda: {reason: 0 for reason in SkipReason}
    )

    @property
    def window_label(self) -> str:
        return "all" if self.window_size is None else str(self.window_size)

    @property
    def evaluated_total(self) -> int:
        return sum(outcome.evaluated for outcome in self.per_class.values())

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())

    def top_k_accuracy(self, k: int) -> float:
        if k not in TOP_K:
            raise ValueError(f"k must be one of {TOP_K}")
        if not self.headline_evaluated:
            return 0.0
        return self.headline_correct[k] / self.headline_evaluated

    def class_top1_accuracy(self, token_class: TokenClass) -> float:
        return self.per_class[token_class].top1_accuracy

    def to_record(self) -> dict:
        return {
            "inventory_id": self.inventory_id,
            "scorer": self.scorer_identity,
            "window": self.window_label,
            "markup": self.markup.value,
            "lemma_mode": self.lemma_mode.value,
            "correctness_threshold": self.correctness_threshold,
            "total_tokens": self.total_tokens,
            "headline_evaluated": self.headline_evaluated,
            "top_k_accuracy": {
                str(k): self.top_k_accuracy(k) for k in TOP_K
            },
            "per_class": {
                cls.value: {
                    "evaluated": outcome.evaluated,
                    "top1_correct": outcome.top1_correct,
                    "top1_accuracy": outcome.top1_accuracy,
                }
                for cls, outcome in self.per_class.items()
            },
            "skipped": {reason.value: count for reason, count in self.skipped.items()},
        }


def _gold_map(
    annotations: Iterable[ScoredSenseAnnotation], inventory_id: str
) -> dict[tuple[str, int], dict[str, int]]:
    """(occurrence) -> sense_id -> best reference score in the inventory."""
    gold: dict[tuple[str, int], dict[str, int]] = {}
    for annotation in dedupe_annotations(annotations):
        if annotation.inventory_id != inventory_id:
            continue
        senses = gold.setdefault(annotation.occurrence, {})
        value = annotation.category.value
        if value > senses.get(annotation.sense_id, 0):
            senses[annotation.sense_id] = value
    return gold


def evaluate(
    corpus: Corpus,
    annotations: Iterable[ScoredSenseAnnotation],
    inventory: SenseInventory,
    scorer,
    config: EvaluationConfig,
    mentions: Iterable[EntityMention] = (),
    lemma_lookup: Mapping[str, str] | None = None,
) -> EvaluationReport:
    """Run the pipeline over every eligible token and tally top-k accuracy.

    Raises :class:`IncompleteGold` when an evaluated token has no reference
    annotations at all in the target inventory; scorer errors propagate.
    """
    if config.inventory_id != inventory.inventory_id:
        raise ValueError(
            f"config targets inventory {config.inventory_id!r} but "
            f"{inventory.inventory_id!r} was given"
        )
    markup = config.markup if config.markup is not None else getattr(
        scorer, "preferred_markup", TargetMarkup.NONE
    )
    gold = _gold_map(annotations, inventory.inventory_id)
    entity_positions: set[tuple[str, int]] = set()
    for mention in mentions:
        for position in mention.positions():
            entity_positions.add((mention.sentence_id, position))

    report = EvaluationReport(
        inventory_id=inventory.inventory_id,
        scorer_identity=getattr(scorer, "identity", str(scorer)),
        window_size=config.window_size,
        markup=markup,
        lemma_mode=config.lemma_mode,
        correctness_threshold=config.correctness_threshold,
    )

    for sentence, token in corpus.tokens():
        report.total_tokens += 1
        occurrence = (sentence.sentence_id, token.position)

        if not token.token_class.carries_senses:
            report.skipped[SkipReason.DIGITS_PUNCTUATION] += 1
            continue
        if occurrence in entity_positions:
            report.skipped[SkipReason.ENTITY_TOKEN] += 1
            continue
        if (
            token.token_class is TokenClass.FUNCTION_WORD
            and not config.include_function_words
        ):
            report.skipped[SkipReason.FUNCTION_WORD_EXCLUDED] += 1
            continue

        try:
            candidates = lookup_candidate_glosses(
                sentence, token.position, inventory, config.lemma_mode, lemma_lookup
            )
        except (MissingGoldLemma, LemmaNotFound):
            report.skipped[SkipReason.LEMMA_MISS] += 1
            continue
        if not candidates:
            report.skipped[SkipReason.NO_CANDIDATES] += 1
            continue

        reference = gold.get(occurrence)
        if reference is None:
            raise IncompleteGold(
                f"token {sentence.sentence_id}:{token.position} "
                f"({token.surface!r}) has no reference annotations in "
                f"inventory {inventory.inventory_id!r}"
            )
        if not any(
            value >= config.correctness_threshold for value in reference.values()
        ):
            report.skipped[SkipReason.NO_GOLD_SENSE] += 1
            continue

        window = extract_window(sentence, token.position, config.window_size)
        pairs = build_pairs(window, candidates, markup)
        ranked = rank_glosses(score_pairs(scorer, pairs))

        hit_rank: int | None = None
        for rank, sense_id in enumerate(ranked):
            if reference.get(sense_id, 0) >= config.correctness_threshold:
                hit_rank = rank
                break

        outcome = report.per_class[token.token_class]
        outcome.evaluated += 1
        if hit_rank == 0:
            outcome.top1_correct += 1
        if token.token_class in _HEADLINE_CLASSES:
            report.headline_evaluated += 1
            for k in TOP_K:
                if hit_rank is not None and hit_rank < k:
                    report.headline_correct[k] += 1

    return report


@dataclass(frozen=True)
class SweepFailure:
    inventory_id: str
    scorer_identity: str
    window_size: int | None
    error: str

    @property
    def window_label(self) -> str:
        return "all" if self.window_size is None else str(self.window_size)


@dataclass
class SweepResult:
    reports: list[EvaluationReport]
    failures: list[SweepFailure]


def sweep(
    corpus: Corpus,
    annotations: Sequence[ScoredSenseAnnotation],
    inventories: Sequence[SenseInventory],
    scorers: Sequence,
    window_sizes: Sequence[int | None],
    *,
    mentions: Iterable[EntityMention] = (),
    lemma_lookup: Mapping[str, str] | None = None,
    markup: TargetMarkup | None = None,
    lemma_mode: LemmaMode = LemmaMode.GOLD,
    correctness_threshold: int = CORRECTNESS_THRESHOLD,
    include_function_words: bool = True,
) -> SweepResult:
    """Cross-product evaluation; one cell's failure never aborts the sweep."""
    mentions = list(mentions)
    result = SweepResult(reports=[], failures=[])
    for scorer in scorers:
        for inventory in inventories:
            for window_size in window_sizes:
                config = EvaluationConfig(
                    inventory_id=inventory.inventory_id,
                    window_size=window_size,
                    markup=markup,
                    lemma_mode=lemma_mode,
                    correctness_threshold=correctness_threshold,
                    include_function_words=include_function_words,
                )
                try:
                    result.reports.append(
                        evaluate(
                            corpus,
                            annotations,
                            inventory,
                            scorer,
                            config,
                            mentions=mentions,
                            lemma_lookup=lemma_lookup,
                        )
                    )
                except WorkbenchError as exc:
                    result.failures.append(
                        SweepFailure(
                            inventory_id=inventory.inventory_id,
                            scorer_identity=getattr(scorer, "identity", str(scorer)),
                            window_size=window_size,
                            error=f"{type(exc).__name__}: {exc}",
                        )
                    )
    return result
