"""Quality review over completed annotations: advisory rule flags,
corpus-level statistics, and inventory coverage.

The three rules mirror the review pass a lead linguist runs after
annotation:

* ``MultipleCorrectSenses`` — an annotator judged two or more senses of one
  inventory as the (near-)exact reading of the same token occurrence.
* ``MissingCorrectSense`` — a Noun/Verb occurrence whose lemma exists in an
  inventory ended up with no Explicate/General sense there.
* ``ProperNounConflict`` — a proper-noun sense was judged correct, yet a
  sibling sense was scored as anything other than Different.

Flags are advisory: they mark occurrences for review and block nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DanglingReference
from .model import (
    Corpus,
    EntityMention,
    EntityType,
    ScoredSenseAnnotation,
    ScoreCategory,
    SenseInventory,
    SYSTEM_INVENTORY_ID,
    TokenClass,
    dedupe_annotations,
    with_system_inventory,
)

_CORRECT_FOR_RULES = (ScoreCategory.EXPLICATE, ScoreCategory.GENERAL)


class ValidationRule(enum.Enum):
    MULTIPLE_CORRECT_SENSES = "MultipleCorrectSenses"
    MISSING_CORRECT_SENSE = "MissingCorrectSense"
    PROPER_NOUN_CONFLICT = "ProperNounConflict"


@dataclass(frozen=True)
class ValidationFlag:
    rule: ValidationRule
    sentence_id: str
    token_position: int
    inventory_id: str
    annotator_id: str
    details: str = ""


def _check_references(
    corpus: Corpus,
    annotations: Sequence[ScoredSenseAnnotation],
    catalog: Mapping[str, SenseInventory],
) -> None:
    for annotation in annotations:
        corpus.token(annotation.sentence_id, annotation.token_position)
        inventory = catalog.get(annotation.inventory_id)
        if inventory is None:
            raise DanglingReference(
                f"annotation references unknown inventory {annotation.inventory_id!r}"
            )
        if not inventory.has_sense(annotation.sense_id):
            raise DanglingReference(
                f"inventory {annotation.inventory_id!r} has no sense "
                f"{annotation.sense_id!r}"
            )


def _occurrence_lemma(
    token_lemma: str | None,
    scored: Mapping[str, list[ScoredSenseAnnotation]],
    catalog: Mapping[str, SenseInventory],
) -> str | None:
    """The lemma an annotator worked on: from any scored sense, else the gold lemma."""
    for inventory_id in sorted(scored):
        inventory = catalog[inventory_id]
        for annotation in scored[inventory_id]:
            sense = inventory.get_sense(annotation.sense_id)
            if sense is not None:
                return sense.lemma_id
    return token_lemma


def validate(
    corpus: Corpus,
    annotations: Iterable[ScoredSenseAnnotation],
    inventories: Mapping[str, SenseInventory] | Sequence[SenseInventory],
) -> list[ValidationFlag]:
    """Run the three review rules over every (occurrence, inventory, annotator).

    Digit/punctuation tokens and the system inventory are exempt. Raises
    :class:`DanglingReference` when an annotation points at a missing
    sentence, token, inventory, or sense.
    """
    catalog = with_system_inventory(inventories)
    annotations = dedupe_annotations(annotations)
    _check_references(corpus, annotations, catalog)

    # (sentence_id, position, annotator) -> inventory_id -> annotations
    grouped: dict[tuple[str, int, str], dict[str, list[ScoredSenseAnnotation]]] = {}
    for annotation in annotations:
        if annotation.inventory_id == SYSTEM_INVENTORY_ID:
            continue
        slot = grouped.setdefault(
            (annotation.sentence_id, annotation.token_position, annotation.annotator_id),
            {},
        )
        slot.setdefault(annotation.inventory_id, []).append(annotation)

    rule_inventories = sorted(
        inventory_id for inventory_id in catalog if inventory_id != SYSTEM_INVENTORY_ID
    )
    flags: list[ValidationFlag] = []
    for (sentence_id, position, annotator_id), scored in sorted(grouped.items()):
        token = corpus.token(sentence_id, position)
        if not token.token_class.carries_senses:
            continue

        for inventory_id in sorted(scored):
            inventory = catalog[inventory_id]
            group = scored[inventory_id]
            correct = [a for a in group if a.category in _CORRECT_FOR_RULES]

            if len(correct) >= 2:
                flags.append(
                    ValidationFlag(
                        ValidationRule.MULTIPLE_CORRECT_SENSES,
                        sentence_id,
                        position,
                        inventory_id,
                        annotator_id,
                        details=f"{len(correct)} senses scored Explicate/General: "
                        + ", ".join(sorted(a.sense_id for a in correct)),
                    )
                )

            proper_correct = [
                a
                for a in correct
                if (sense := inventory.get_sense(a.sense_id)) is not None
                and sense.is_proper_noun
            ]
            if proper_correct:
                proper_ids = {a.sense_id for a in proper_correct}
                conflicting = sorted(
                    a.sense_id
                    for a in group
                    if a.sense_id not in proper_ids
                    and a.category is not ScoreCategory.DIFFERENT
                )
                if conflicting:
                    flags.append(
                        ValidationFlag(
                            ValidationRule.PROPER_NOUN_CONFLICT,
                            sentence_id,
                            position,
                            inventory_id,
                            annotator_id,
                            details=f"proper-noun sense(s) {', '.join(sorted(proper_ids))} "
                            f"scored correct while {', '.join(conflicting)} not Different",
                        )
                    )

        # Rule (ii): only Noun/Verb occurrences whose lemma resolves in the
        # inventory; an inventory the annotator skipped entirely still counts.
        if token.token_class not in (TokenClass.NOUN, TokenClass.VERB):
            continue
        lemma_id = _occurrence_lemma(token.gold_lemma_id, scored, catalog)
        if lemma_id is None:
            continue
        for inventory_id in rule_inventories:
            if not catalog[inventory_id].has_lemma(lemma_id):
                continue
            group = scored.get(inventory_id, [])
            if not any(a.category in _CORRECT_FOR_RULES for a in group):
                flags.append(
                    ValidationFlag(
                        ValidationRule.MISSING_CORRECT_SENSE,
                        sentence_id,
                        position,
                        inventory_id,
                        annotator_id,
                        details=f"lemma {lemma_id!r}: no sense scored Explicate/General "
                        f"({len(group)} senses scored)",
                    )
                )

    flags.sort(
        key=lambda f: (f.sentence_id, f.token_position, f.inventory_id, f.annotator_id, f.rule.value)
    )
    return flags


# --- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class ClassStatistics:
    tokens: int
    unique_tokens: int
    unique_lemmas: int
    unique_senses: int


@dataclass(frozen=True)
class EntityStatistics:
    mentions: int
    tokens: int


@dataclass(frozen=True)
class CorpusStatistics:
    per_class: Mapping[TokenClass, ClassStatistics]
    total: ClassStatistics
    per_entity_type: Mapping[EntityType, EntityStatistics]
    entity_total: EntityStatistics


def corpus_statistics(
    corpus: Corpus,
    annotations: Iterable[ScoredSenseAnnotation] = (),
    mentions: Iterable[EntityMention] = (),
) -> CorpusStatistics:
    """Per-class token/lemma/sense tallies plus entity-mention counts.

    Uniqueness is computed on surface strings, lemma ids, and sense ids
    within each class; tokens without a gold lemma (digits, punctuation)
    count their surface as the lemma. A sense counts for a class when any
    annotator scored it as correct (>= 60) on a token of that class.
    Totals are sums over classes, so an item shared by two classes counts
    once per class.
    """
    annotations = dedupe_annotations(annotations)
    gold_by_occurrence: dict[tuple[str, int], set[str]] = {}
    for annotation in annotations:
        if annotation.category.is_correct():
            gold_by_occurrence.setdefault(annotation.occurrence, set()).add(
                annotation.sense_id
            )

    counts: dict[TokenClass, int] = {cls: 0 for cls in TokenClass}
    surfaces: dict[TokenClass, set[str]] = {cls: set() for cls in TokenClass}
    lemmas: dict[TokenClass, set[str]] = {cls: set() for cls in TokenClass}
    senses: dict[TokenClass, set[str]] = {cls: set() for cls in TokenClass}
    for sentence, token in corpus.tokens():
        cls = token.token_class
        counts[cls] += 1
        surfaces[cls].add(token.surface)
        lemmas[cls].add(token.gold_lemma_id or token.surface)
        senses[cls].update(
            gold_by_occurrence.get((sentence.sentence_id, token.position), ())
        )

    per_class = {
        cls: ClassStatistics(
            tokens=counts[cls],
            unique_tokens=len(surfaces[cls]),
            unique_lemmas=len(lemmas[cls]),
            unique_senses=len(senses[cls]),
        )
        for cls in TokenClass
    }
    total = ClassStatistics(
        tokens=sum(s.tokens for s in per_class.values()),
        unique_tokens=sum(s.unique_tokens for s in per_class.values()),
        unique_lemmas=sum(s.unique_lemmas for s in per_class.values()),
        unique_senses=sum(s.unique_senses for s in per_class.values()),
    )

    mention_counts: dict[EntityType, int] = {t: 0 for t in EntityType}
    token_counts: dict[EntityType, int] = {t: 0 for t in EntityType}
    for mention in mentions:
        mention_counts[mention.entity_type] += 1
        token_counts[mention.entity_type] += mention.length
    per_entity_type = {
        t: EntityStatistics(mentions=mention_counts[t], tokens=token_counts[t])
        for t in EntityType
    }
    entity_total = EntityStatistics(
        mentions=sum(mention_counts.values()), tokens=sum(token_counts.values())
    )
    return CorpusStatistics(per_class, total, per_entity_type, entity_total)


# --- coverage -----------------------------------------------------------------

@dataclass(frozen=True)
class CoverageCounts:
    covered: int
    total: int

    @property
    def ratio(self) -> float:
        return self.covered / self.total if self.total else 0.0


@dataclass(frozen=True)
class CoverageReport:
    inventory_id: str
    lemmas: CoverageCounts
    senses_excluding_proper: CoverageCounts
    proper_noun_senses: CoverageCounts


def coverage_report(
    corpus: Corpus,
    annotations: Iterable[ScoredSenseAnnotation],
    inventory: SenseInventory,
    catalog: Mapping[str, SenseInventory] | Sequence[SenseInventory] | None = None,
) -> CoverageReport:
    """How much of the annotated material one inventory accounts for.

    The universes are properties of the corpus and its annotations alone:
    distinct lemmas of sense-annotated tokens (digits/punctuation excluded),
    and distinct senses scored correct (>= 60) by any annotator — split by
    the proper-noun flag, resolved through ``catalog`` (defaults to the
    target inventory plus the system inventory; senses no catalog inventory
    resolves count as regular senses). The report gives the fraction of
    each universe the target inventory resolves.
    """
    if catalog is None:
        catalog = {inventory.inventory_id: inventory}
    resolved_catalog = with_system_inventory(catalog)
    resolved_catalog.setdefault(inventory.inventory_id, inventory)
    annotations = dedupe_annotations(annotations)

    annotated_occurrences: dict[tuple[str, int], list[ScoredSenseAnnotation]] = {}
    for annotation in annotations:
        if annotation.inventory_id == SYSTEM_INVENTORY_ID:
            continue
        annotated_occurrences.setdefault(annotation.occurrence, []).append(annotation)

    lemma_universe: set[str] = set()
    for (sentence_id, position), group in annotated_occurrences.items():
        token = corpus.token(sentence_id, position)
        if not token.token_class.carries_senses:
            continue
        lemma_id = token.gold_lemma_id
        if lemma_id is None:
            for annotation in sorted(group, key=lambda a: (a.inventory_id, a.sense_id)):
                owner = resolved_catalog.get(annotation.inventory_id)
                sense = owner.get_sense(annotation.sense_id) if owner else None
                if sense is not None:
                    lemma_id = sense.lemma_id
                    break
        if lemma_id is not None:
            lemma_universe.add(lemma_id)

    regular_universe: set[str] = set()
    proper_universe: set[str] = set()
    for annotation in annotations:
        if annotation.inventory_id == SYSTEM_INVENTORY_ID:
            continue
        if not annotation.category.is_correct():
            continue
        owner = resolved_catalog.get(annotation.inventory_id)
        sense = owner.get_sense(annotation.sense_id) if owner else None
        if sense is not None and sense.is_proper_noun:
            proper_universe.add(annotation.sense_id)
        else:
            regular_universe.add(annotation.sense_id)

    lemma_covered = sum(1 for lemma_id in lemma_universe if inventory.has_lemma(lemma_id))
    regular_covered = sum(1 for sense_id in regular_universe if inventory.has_sense(sense_id))
    proper_covered = sum(1 for sense_id in proper_universe if inventory.has_sense(sense_id))
    return CoverageReport(
        inventory_id=inventory.inventory_id,
        lemmas=CoverageCounts(lemma_covered, len(lemma_universe)),
        senses_excluding_proper=CoverageCounts(regular_covered, len(regular_universe)),
        proper_noun_senses=CoverageCounts(proper_covered, len(proper_universe)),
    )
