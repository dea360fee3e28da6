"""Shared builders for compact test fixtures."""

from __future__ import annotations

import pytest

from sensekit.model import (
    Corpus,
    Lemma,
    ScoredSenseAnnotation,
    Sense,
    SenseInventory,
    Sentence,
    Token,
    TokenClass,
    category_from_value,
)

_CLASS_ABBREV = {
    "n": TokenClass.NOUN,
    "v": TokenClass.VERB,
    "f": TokenClass.FUNCTION_WORD,
    "d": TokenClass.DIGIT,
    "p": TokenClass.PUNCTUATION,
}


def make_sentence(sentence_id: str, specs) -> Sentence:
    """specs: iterable of (surface, class_abbrev[, lemma_id]) tuples."""
    tokens = []
    for position, spec in enumerate(specs):
        surface, abbrev, *rest = spec
        tokens.append(
            Token(
                position=position,
                surface=surface,
                token_class=_CLASS_ABBREV[abbrev],
                gold_lemma_id=rest[0] if rest else None,
            )
        )
    return Sentence(sentence_id, tuple(tokens))


def make_inventory(inventory_id: str, lemmas: dict) -> SenseInventory:
    """lemmas: lemma_id -> sense count, or -> list of (sense_id[, proper]).

    Generated sense ids follow ``{lemma_id}.{rank}``; glosses are synthetic.
    """
    lemma_objects = []
    senses = []
    for lemma_id, spec in lemmas.items():
        lemma_objects.append(Lemma(lemma_id=lemma_id, citation_form=lemma_id, pos="noun"))
        if isinstance(spec, int):
            spec = [(f"{lemma_id}.{rank}",) for rank in range(spec)]
        for rank, sense_spec in enumerate(spec):
            sense_id, *rest = sense_spec
            senses.append(
                Sense(
                    sense_id=sense_id,
                    lemma_id=lemma_id,
                    gloss=f"gloss of {sense_id}",
                    inventory_id=inventory_id,
                    rank_in_lemma=rank,
                    is_proper_noun=bool(rest and rest[0]),
                )
            )
    return SenseInventory(inventory_id, lemma_objects, senses)


def ann(
    sentence_id: str,
    position: int,
    sense_id: str,
    inventory_id: str,
    value: int,
    annotator_id: str,
    timestamp: str = "",
) -> ScoredSenseAnnotation:
    return ScoredSenseAnnotation(
        sentence_id=sentence_id,
        token_position=position,
        sense_id=sense_id,
        inventory_id=inventory_id,
        category=category_from_value(value),
        annotator_id=annotator_id,
        timestamp=timestamp,
    )


@pytest.fixture
def tiny_corpus() -> Corpus:
    """Five-token sentence + three-token sentence covering all classes."""
    return Corpus(
        [
            make_sentence(
                "t1",
                [
                    ("saw", "v", "saw_v"),
                    ("the", "f"),
                    ("bank", "n", "bank_n"),
                    ("9", "d"),
                    (".", "p"),
                ],
            ),
            make_sentence("t2", [("spring", "n", "spring_n"), ("runs", "v", "run_v"), (".", "p")]),
        ]
    )


@pytest.fixture
def tiny_inventory() -> SenseInventory:
    return make_inventory(
        "inv",
        {
            "saw_v": 2,
            "bank_n": [("bank_n.0",), ("bank_n.1",)],
            "spring_n": 3,
            "run_v": 1,
        },
    )
