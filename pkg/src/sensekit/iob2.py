"""IOB2 tag encoding for flat entity mentions, and its inverse."""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import MalformedIOB2, OverlappingMentions, SpanOutOfRange, UnknownEntityType
from .model import EntityMention, EntityType, Sentence

OUTSIDE_TAG = "O"


def to_iob2(sentence: Sentence, mentions: Iterable[EntityMention]) -> list[str]:
    """Render a sentence's mentions as one IOB2 tag per token.

    Mentions must belong to the sentence, stay within its bounds, and not
    overlap; the first token of a mention gets ``B-<type>`` and the rest
    ``I-<type>``.
    """
    size = len(sentence.tokens)
    tags = [OUTSIDE_TAG] * size
    occupied = [False] * size
    ordered = sorted(mentions, key=lambda m: (m.start_position, m.end_position))
    for mention in ordered:
        if mention.sentence_id != sentence.sentence_id:
            raise SpanOutOfRange(
                f"mention for sentence {mention.sentence_id!r} cannot be encoded "
                f"against sentence {sentence.sentence_id!r}"
            )
        if mention.end_position >= size:
            raise SpanOutOfRange(
                f"sentence {sentence.sentence_id!r}: span "
                f"[{mention.start_position}, {mention.end_position}] exceeds "
                f"{size} tokens"
            )
        span = list(mention.positions())
        if any(occupied[p] for p in span):
            raise OverlappingMentions(
                f"sentence {sentence.sentence_id!r}: span "
                f"[{mention.start_position}, {mention.end_position}] overlaps "
                f"an earlier mention"
            )
        for p in span:
            occupied[p] = True
        tags[mention.start_position] = f"B-{mention.entity_type.value}"
        for p in span[1:]:
            tags[p] = f"I-{mention.entity_type.value}"
    return tags


def _parse_entity_type(label: str, tag: str) -> EntityType:
    try:
        return EntityType(label)
    except ValueError:
        raise UnknownEntityType(f"tag {tag!r} names unknown entity type {label!r}") from None


def from_iob2(tags: Sequence[str], sentence_id: str = "") -> list[EntityMention]:
    """Decode an IOB2 tag sequence back into mentions, in textual order.

    An ``I-`` tag that follows ``O``, the sentence start, or a different
    type raises :class:`MalformedIOB2`; unknown entity types raise
    :class:`UnknownEntityType`.
    """
    mentions: list[EntityMention] = []
    current_type: EntityType | None = None
    current_start = 0

    def close(end_exclusive: int) -> None:
        nonlocal current_type
        if current_type is not None:
            mentions.append(
                EntityMention(sentence_id, current_start, end_exclusive - 1, current_type)
            )
            current_type = None

    for index, tag in enumerate(tags):
        if tag == OUTSIDE_TAG:
            close(index)
        elif tag.startswith("B-"):
            close(index)
            current_type = _parse_entity_type(tag[2:], tag)
            current_start = index
        elif tag.startswith("I-"):
            inside = _parse_entity_type(tag[2:], tag)
            if current_type is None:
                raise MalformedIOB2(
                    f"position {index}: {tag!r} continues no open mention"
                )
            if inside is not current_type:
                raise MalformedIOB2(
                    f"position {index}: {tag!r} continues a {current_type.value} mention"
                )
        else:
            raise MalformedIOB2(f"position {index}: unrecognized tag {tag!r}")
    close(len(tags))
    return mentions
