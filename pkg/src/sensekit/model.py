"""Core data model: tokens, sentences, sense inventories, scored sense
annotations, and flat entity mentions.

Everything in this module is an immutable value; the only mutable state in
the package lives in the annotation store. Identifier fields are plain
strings so corpora and lexicons from different sources can coexist.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DanglingReference, InvalidScoreValue

CORRECTNESS_THRESHOLD = 60


class ScoreCategory(enum.Enum):
    """The six ordered relatedness labels a candidate sense can receive.

    Values are the integer percents stored on disk. A score of at least 60
    marks the sense as a correct reading of the token. ``DIFFERENT``
    deliberately carries 1 rather than 0.
    """

    EXPLICATE = 100
    GENERAL = 80
    REFERRAL = 60
    RELATED = 40
    ROOT_SEMANTICS = 20
    DIFFERENT = 1

    @property
    def numeric_value(self) -> int:
        return self.value

    @property
    def ordinal(self) -> int:
        """Position on the ordinal scale: DIFFERENT = 0 .. EXPLICATE = 5."""
        return _ORDINAL_INDEX[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    def is_correct(self) -> bool:
        """Whether this score marks the sense as a correct reading (>= 60)."""
        return self.value >= CORRECTNESS_THRESHOLD


_ORDINAL_INDEX = {
    category: index
    for index, category in enumerate(sorted(ScoreCategory, key=lambda c: c.value))
}

_DISPLAY_NAMES = {
    ScoreCategory.EXPLICATE: "Explicate",
    ScoreCategory.GENERAL: "General",
    ScoreCategory.REFERRAL: "Referral",
    ScoreCategory.RELATED: "Related",
    ScoreCategory.ROOT_SEMANTICS: "RootSemantics",
    ScoreCategory.DIFFERENT: "Different",
}

SCORE_VALUES = tuple(sorted(c.value for c in ScoreCategory))  # (1, 20, 40, 60, 80, 100)
NUM_CATEGORIES = len(ScoreCategory)  # K = 6


def category_from_value(value: int) -> ScoreCategory:
    """Map a stored numeric score back to its category.

    Raises :class:`InvalidScoreValue` for anything outside the six legal
    values.
    """
    try:
        return ScoreCategory(value)
    except ValueError:
        raise InvalidScoreValue(
            f"no score category has value {value!r}; legal values: {SCORE_VALUES}"
        ) from None


def parse_category(raw: int | str) -> ScoreCategory:
    """Parse a category from a numeric value or a (display) name."""
    if isinstance(raw, bool):
        raise InvalidScoreValue(f"no score category for {raw!r}")
    if isinstance(raw, int):
        return category_from_value(raw)
    text = str(raw).strip()
    try:
        return category_from_value(int(text))
    except (ValueError, InvalidScoreValue):
        pass
    lowered = text.lower()
    for category, name in _DISPLAY_NAMES.items():
        if lowered in (name.lower(), category.name.lower()):
            return category
    raise InvalidScoreValue(f"unknown score category {raw!r}")


class TokenClass(enum.Enum):
    NOUN = "noun"
    VERB = "verb"
    FUNCTION_WORD = "function_word"
    DIGIT = "digit"
    PUNCTUATION = "punctuation"

    @property
    def carries_senses(self) -> bool:
        """Digits and punctuation take the fixed sentinel senses only."""
        return self not in (TokenClass.DIGIT, TokenClass.PUNCTUATION)


class EntityType(enum.Enum):
    PERS = "PERS"
    ORG = "ORG"
    GPE = "GPE"
    LOC = "LOC"
    FAC = "FAC"
    CURR = "CURR"


@dataclass(frozen=True)
class Token:
    """One token occurrence inside a sentence."""

    position: int
    surface: str
    token_class: TokenClass
    gold_lemma_id: str | None = None

    def __post_init__(self) -> None:
        if self.position < 0:
            raise ValueError(f"token position must be >= 0, got {self.position}")
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True)
class Sentence:
    """A tokenized sentence; token positions are 0-based and contiguous."""

    sentence_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.sentence_id:
            raise ValueError("sentence_id must be non-empty")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for expected, token in enumerate(self.tokens):
            if token.position != expected:
                raise ValueError(
                    f"sentence {self.sentence_id!r}: token positions must be "
                    f"contiguous from 0; expected {expected}, got {token.position}"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> tuple[str, ...]:
        return tuple(token.surface for token in self.tokens)


class Corpus:
    """An ordered collection of sentences with id lookup."""

    def __init__(self, sentences: Iterable[Sentence]):
        self._sentences = tuple(sentences)
        self._by_id: dict[str, Sentence] = {}
        for sentence in self._sentences:
            if sentence.sentence_id in self._by_id:
                raise ValueError(f"duplicate sentence_id {sentence.sentence_id!r}")
            self._by_id[sentence.sentence_id] = sentence

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return self._sentences

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self._sentences)

    def __len__(self) -> int:
        return len(self._sentences)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._sentences == other._sentences

    def __repr__(self) -> str:
        return f"Corpus({len(self._sentences)} sentences)"

    def get(self, sentence_id: str) -> Sentence | None:
        return self._by_id.get(sentence_id)

    def sentence(self, sentence_id: str) -> Sentence:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise DanglingReference(f"unknown sentence {sentence_id!r}") from None

    def token(self, sentence_id: str, position: int) -> Token:
        sentence = self.sentence(sentence_id)
        if not 0 <= position < len(sentence.tokens):
            raise DanglingReference(
                f"sentence {sentence_id!r} has no token at position {position}"
            )
        return sentence.tokens[position]

    def tokens(self) -> Iterator[tuple[Sentence, Token]]:
        for sentence in self._sentences:
            for token in sentence.tokens:
                yield sentence, token


@dataclass(frozen=True)
class Lemma:
    """A dictionary headword."""

    lemma_id: str
    citation_form: str
    pos: str = ""

    def __post_init__(self) -> None:
        if not self.lemma_id:
            raise ValueError("lemma_id must be non-empty")
        if not self.citation_form:
            raise ValueError(f"lemma {self.lemma_id!r}: citation form must be non-empty")


@dataclass(frozen=True)
class Sense:
    """One gloss of a lemma inside a specific inventory."""

    sense_id: str
    lemma_id: str
    gloss: str
    inventory_id: str
    rank_in_lemma: int
    is_proper_noun: bool = False

    def __post_init__(self) -> None:
        if not self.sense_id:
            raise ValueError("sense_id must be non-empty")
        if self.rank_in_lemma < 0:
            raise ValueError(f"sense {self.sense_id!r}: rank_in_lemma must be >= 0")


class SenseInventory:
    """A sense inventory: lemmas plus their ordered sense lists."""

    def __init__(self, inventory_id: str, lemmas: Iterable[Lemma], senses: Iterable[Sense]):
        if not inventory_id:
            raise ValueError("inventory_id must be non-empty")
        self._inventory_id = inventory_id
        self._lemmas: dict[str, Lemma] = {}
        for lemma in lemmas:
            if lemma.lemma_id in self._lemmas:
                raise ValueError(f"duplicate lemma_id {lemma.lemma_id!r}")
            self._lemmas[lemma.lemma_id] = lemma
        self._senses: dict[str, Sense] = {}
        grouped: dict[str, list[Sense]] = {}
        for sense in senses:
            if sense.inventory_id != inventory_id:
                raise ValueError(
                    f"sense {sense.sense_id!r} belongs to inventory "
                    f"{sense.inventory_id!r}, not {inventory_id!r}"
                )
            if sense.sense_id in self._senses:
                raise ValueError(f"duplicate sense_id {sense.sense_id!r}")
            if sense.lemma_id not in self._lemmas:
                raise DanglingReference(
                    f"sense {sense.sense_id!r} references unknown lemma {sense.lemma_id!r}"
                )
            self._senses[sense.sense_id] = sense
            grouped.setdefault(sense.lemma_id, []).append(sense)
        self._by_lemma: dict[str, tuple[Sense, ...]] = {}
        for lemma_id, group in grouped.items():
            ranks = [sense.rank_in_lemma for sense in group]
            if len(set(ranks)) != len(ranks):
                raise ValueError(f"lemma {lemma_id!r}: duplicate rank_in_lemma values")
            self._by_lemma[lemma_id] = tuple(sorted(group, key=lambda s: s.rank_in_lemma))

    @property
    def inventory_id(self) -> str:
        return self._inventory_id

    @property
    def lemmas(self) -> tuple[Lemma, ...]:
        return tuple(self._lemmas.values())

    @property
    def senses(self) -> tuple[Sense, ...]:
        return tuple(self._senses.values())

    def has_lemma(self, lemma_id: str) -> bool:
        return lemma_id in self._lemmas

    def get_lemma(self, lemma_id: str) -> Lemma | None:
        return self._lemmas.get(lemma_id)

    def has_sense(self, sense_id: str) -> bool:
        return sense_id in self._senses

    def get_sense(self, sense_id: str) -> Sense | None:
        return self._senses.get(sense_id)

    def senses_for_lemma(self, lemma_id: str) -> tuple[Sense, ...]:
        """All senses of the lemma in rank order; empty when absent."""
        return self._by_lemma.get(lemma_id, ())

    def search_lemmas(self, query: str) -> list[Lemma]:
        """Substring match over citation forms, in stable lemma order."""
        return [lemma for lemma in self._lemmas.values() if query in lemma.citation_form]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SenseInventory):
            return NotImplemented
        return (
            self._inventory_id == other._inventory_id
            and self._lemmas == other._lemmas
            and self._senses == other._senses
        )

    def __repr__(self) -> str:
        return (
            f"SenseInventory({self._inventory_id!r}, {len(self._lemmas)} lemmas, "
            f"{len(self._senses)} senses)"
        )


@dataclass(frozen=True)
class ScoredSenseAnnotation:
    """One annotator's category for one candidate sense of one token occurrence."""

    sentence_id: str
    token_position: int
    sense_id: str
    inventory_id: str
    category: ScoreCategory
    annotator_id: str
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.token_position < 0:
            raise ValueError("token_position must be >= 0")
        for field_name in ("sentence_id", "sense_id", "inventory_id", "annotator_id"):
            if not getattr(self, field_name):
                raise ValueError(f"{field_name} must be non-empty")

    @property
    def occurrence(self) -> tuple[str, int]:
        return (self.sentence_id, self.token_position)

    def key(self) -> tuple[str, int, str, str, str]:
        """Identity: one live score per (occurrence, inventory, sense, annotator)."""
        return (
            self.sentence_id,
            self.token_position,
            self.inventory_id,
            self.sense_id,
            self.annotator_id,
        )


def dedupe_annotations(
    annotations: Iterable[ScoredSenseAnnotation],
) -> list[ScoredSenseAnnotation]:
    """Collapse duplicate identity keys, keeping the last record for each."""
    by_key: dict[tuple, ScoredSenseAnnotation] = {}
    for annotation in annotations:
        by_key[annotation.key()] = annotation
    return list(by_key.values())


@dataclass(frozen=True)
class EntityMention:
    """A flat (non-nested) entity span over token positions, inclusive."""

    sentence_id: str
    start_position: int
    end_position: int
    entity_type: EntityType

    def __post_init__(self) -> None:
        if self.start_position < 0:
            raise ValueError("start_position must be >= 0")
        if self.end_position < self.start_position:
            raise ValueError(
                f"end_position {self.end_position} precedes start_position "
                f"{self.start_position}"
            )

    @property
    def length(self) -> int:
        return self.end_position - self.start_position + 1

    def positions(self) -> range:
        return range(self.start_position, self.end_position + 1)


SYSTEM_INVENTORY_ID = "system"
DIGIT_SENSE_ID = "digit"
PUNCTUATION_SENSE_ID = "punc"


def system_inventory() -> SenseInventory:
    """The built-in inventory holding the two sentinel senses.

    Every digit token shares one reserved sense and every punctuation token
    shares the other, so class-level sense counts stay well defined without
    per-token lexicon entries.
    """
    lemmas = [
        Lemma("digit", "digit", "digit"),
        Lemma("punc", "Punc", "punctuation"),
    ]
    senses = [
        Sense(DIGIT_SENSE_ID, "digit", "shared sense covering ordinal and nominal numbers",
              SYSTEM_INVENTORY_ID, 0),
        Sense(PUNCTUATION_SENSE_ID, "punc", "shared sense covering punctuation marks",
              SYSTEM_INVENTORY_ID, 0),
    ]
    return SenseInventory(SYSTEM_INVENTORY_ID, lemmas, senses)


def with_system_inventory(
    inventories: Mapping[str, SenseInventory] | Sequence[SenseInventory],
) -> dict[str, SenseInventory]:
    """Normalize to an id->inventory mapping that includes the system inventory."""
    if isinstance(inventories, Mapping):
        catalog = dict(inventories)
    else:
        catalog = {inventory.inventory_id: inventory for inventory in inventories}
    catalog.setdefault(SYSTEM_INVENTORY_ID, system_inventory())
    return catalog
