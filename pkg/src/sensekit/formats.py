"""Line-per-record file formats (UTF-8 JSON lines) for corpora, lexicons,
annotations, and entity tags, plus a flat per-token spreadsheet export.

Field names and shapes are documented in FORMATS.md at the repository root.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvalidScoreValue
from .iob2 import from_iob2, to_iob2
from .model import (
    Corpus,
    EntityMention,
    Lemma,
    ScoredSenseAnnotation,
    Sense,
    SenseInventory,
    Sentence,
    Token,
    TokenClass,
    category_from_value,
)


def _records(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def _dump(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def _write_lines(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(_dump(record) + "\n")


# --- corpus ---------------------------------------------------------------

def token_to_record(token: Token) -> dict:
    record = {"surface": token.surface, "class": token.token_class.value}
    if token.gold_lemma_id is not None:
        record["lemma_id"] = token.gold_lemma_id
    return record


def sentence_to_record(sentence: Sentence) -> dict:
    return {
        "sentence_id": sentence.sentence_id,
        "tokens": [token_to_record(token) for token in sentence.tokens],
    }


def sentence_from_record(record: dict) -> Sentence:
    tokens = []
    for position, raw in enumerate(record["tokens"]):
        tokens.append(
            Token(
                position=position,
                surface=raw["surface"],
                token_class=TokenClass(raw["class"]),
                gold_lemma_id=raw.get("lemma_id"),
            )
        )
    return Sentence(record["sentence_id"], tuple(tokens))


def load_corpus(path: str | Path) -> Corpus:
    sentences = []
    for lineno, record in _records(path):
        try:
            sentences.append(sentence_from_record(record))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad sentence record ({exc})") from None
    return Corpus(sentences)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    _write_lines(path, (sentence_to_record(sentence) for sentence in corpus))


# --- lexicons ---------------------------------------------------------------

def load_inventory(path: str | Path, inventory_id: str) -> SenseInventory:
    """Load one lexicon file as the inventory named ``inventory_id``."""
    lemmas: list[Lemma] = []
    senses: list[Sense] = []
    for lineno, record in _records(path):
        try:
            lemma = Lemma(
                lemma_id=record["lemma_id"],
                citation_form=record["citation_form"],
                pos=record.get("pos", ""),
            )
            lemmas.append(lemma)
            for rank, raw in enumerate(record.get("senses", [])):
                senses.append(
                    Sense(
                        sense_id=raw["sense_id"],
                        lemma_id=lemma.lemma_id,
                        gloss=raw["gloss"],
                        inventory_id=inventory_id,
                        rank_in_lemma=rank,
                        is_proper_noun=bool(raw.get("proper_noun", False)),
                    )
                )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad lemma record ({exc})") from None
    return SenseInventory(inventory_id, lemmas, senses)


def save_inventory(inventory: SenseInventory, path: str | Path) -> None:
    def records() -> Iterator[dict]:
        for lemma in inventory.lemmas:
            yield {
                "lemma_id": lemma.lemma_id,
                "citation_form": lemma.citation_form,
                "pos": lemma.pos,
                "senses": [
                    {
                        "sense_id": sense.sense_id,
                        "gloss": sense.gloss,
                        "proper_noun": sense.is_proper_noun,
                    }
                    for sense in inventory.senses_for_lemma(lemma.lemma_id)
                ],
            }

    _write_lines(path, records())


# --- annotations ------------------------------------------------------------

def annotation_to_record(annotation: ScoredSenseAnnotation) -> dict:
    record = {
        "sentence_id": annotation.sentence_id,
        "token_position": annotation.token_position,
        "sense_id": annotation.sense_id,
        "inventory_id": annotation.inventory_id,
        "score": annotation.category.value,
        "annotator_id": annotation.annotator_id,
    }
    if annotation.timestamp:
        record["timestamp"] = annotation.timestamp
    return record


def annotation_from_record(record: dict) -> ScoredSenseAnnotation:
    score = record["score"]
    if not isinstance(score, int) or isinstance(score, bool):
        raise InvalidScoreValue(f"score must be an integer, got {score!r}")
    return ScoredSenseAnnotation(
        sentence_id=record["sentence_id"],
        token_position=record["token_position"],
        sense_id=record["sense_id"],
        inventory_id=record["inventory_id"],
        category=category_from_value(score),
        annotator_id=record["annotator_id"],
        timestamp=record.get("timestamp", ""),
    )


def load_annotations(path: str | Path) -> list[ScoredSenseAnnotation]:
    annotations = []
    for lineno, record in _records(path):
        try:
            annotations.append(annotation_from_record(record))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad annotation record ({exc})") from None
    return annotations


def save_annotations(
    annotations: Iterable[ScoredSenseAnnotation], path: str | Path
) -> None:
    _write_lines(path, (annotation_to_record(a) for a in annotations))


# --- entity tags ------------------------------------------------------------

def load_mentions(path: str | Path) -> list[EntityMention]:
    """Read an entity file (one IOB2 tag array per sentence)."""
    mentions: list[EntityMention] = []
    for lineno, record in _records(path):
        try:
            mentions.extend(from_iob2(record["tags"], record["sentence_id"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad entity record ({exc})") from None
    return mentions


def save_mentions(
    corpus: Corpus, mentions: Iterable[EntityMention], path: str | Path
) -> None:
    """Write one IOB2 line per corpus sentence (all-``O`` when unmentioned)."""
    by_sentence: dict[str, list[EntityMention]] = {}
    for mention in mentions:
        by_sentence.setdefault(mention.sentence_id, []).append(mention)

    def records() -> Iterator[dict]:
        for sentence in corpus:
            tags = to_iob2(sentence, by_sentence.get(sentence.sentence_id, []))
            yield {"sentence_id": sentence.sentence_id, "tags": tags}

    _write_lines(path, records())


# --- flat per-token export ---------------------------------------------------

TOKEN_EXPORT_HEADER = ("sentence_id", "position", "surface", "class", "lemma_id")


def _tsv_field(value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"field {value!r} contains a tab or newline")
    return value


def write_token_export(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(TOKEN_EXPORT_HEADER) + "\n")
        for sentence, token in corpus.tokens():
            row = (
                _tsv_field(sentence.sentence_id),
                str(token.position),
                _tsv_field(token.surface),
                token.token_class.value,
                _tsv_field(token.gold_lemma_id or ""),
            )
            handle.write("\t".join(row) + "\n")


def read_token_export(path: str | Path) -> Corpus:
    grouped: dict[str, list[Token]] = {}
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if tuple(header.split("\t")) != TOKEN_EXPORT_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(TOKEN_EXPORT_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(TOKEN_EXPORT_HEADER)} fields")
            sentence_id, position, surface, token_class, lemma_id = fields
            grouped.setdefault(sentence_id, []).append(
                Token(
                    position=int(position),
                    surface=surface,
                    token_class=TokenClass(token_class),
                    gold_lemma_id=lemma_id or None,
                )
            )
    return Corpus(Sentence(sid, tuple(tokens)) for sid, tokens in grouped.items())
