"""Gloss-ranking disambiguation pipeline.

Three phases: resolve the target token to a lemma and fetch its candidate
senses; cut a context window around the target and pair the rendered
context with every candidate gloss; hand the pairs to a verification
scorer and rank candidates by the confidence that context and gloss
express the same meaning.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import LemmaNotFound, MissingGoldLemma, ScorerProtocolError
from .model import Sense, SenseInventory, Sentence

VALID_WINDOW_SIZES = (3, 5, 7, 9, 11)  # None means the whole sentence


class TargetMarkup(enum.Enum):
    """How the target token is marked inside the rendered context."""

    NONE = "none"
    XML_TOKEN = "xml_token"
    UNUSED0 = "unused0"


XML_TOKEN_OPEN = "<token>"
XML_TOKEN_CLOSE = "</token>"
UNUSED0_MARKER = "[UNUSED0]"


class LemmaMode(enum.Enum):
    """Where the target lemma comes from: the corpus gold field, or an
    external surface-to-lemma lookup table."""

    GOLD = "gold"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ContextWindow:
    """A token slice around one target occurrence.

    ``tokens`` holds surfaces; ``target_offset`` locates the target inside
    the slice. Windows never borrow material from neighbouring sentences:
    at sentence edges the slice just gets shorter.
    """

    sentence_id: str
    target_position: int
    window_size: int | None
    tokens: tuple[str, ...]
    target_offset: int


def extract_window(
    sentence: Sentence, target_position: int, window_size: int | None
) -> ContextWindow:
    """Cut a window of ``window_size`` tokens centred on the target.

    ``window_size`` must be one of 3/5/7/9/11, or None for the whole
    sentence. The slice is truncated at sentence boundaries, so its length
    is min((s-1)/2, left) + 1 + min((s-1)/2, right).
    """
    if not 0 <= target_position < len(sentence.tokens):
        raise ValueError(
            f"sentence {sentence.sentence_id!r} has no token at {target_position}"
        )
    if window_size is None:
        start, end = 0, len(sentence.tokens) - 1
    else:
        if window_size not in VALID_WINDOW_SIZES:
            raise ValueError(
                f"window_size must be None or one of {VALID_WINDOW_SIZES}, "
                f"got {window_size!r}"
            )
        half = (window_size - 1) // 2
        start = max(0, target_position - half)
        end = min(len(sentence.tokens) - 1, target_position + half)
    return ContextWindow(
        sentence_id=sentence.sentence_id,
        target_position=target_position,
        window_size=window_size,
        tokens=tuple(t.surface for t in sentence.tokens[start : end + 1]),
        target_offset=target_position - start,
    )


def render_context(window: ContextWindow, markup: TargetMarkup) -> str:
    """Join the window tokens with single spaces, marking the target only.

    Stripping the marker strings recovers the unmarked rendering exactly.
    """
    pieces = list(window.tokens)
    target = pieces[window.target_offset]
    if markup is TargetMarkup.XML_TOKEN:
        pieces[window.target_offset] = f"{XML_TOKEN_OPEN}{target}{XML_TOKEN_CLOSE}"
    elif markup is TargetMarkup.UNUSED0:
        pieces[window.target_offset] = f"{UNUSED0_MARKER} {target} {UNUSED0_MARKER}"
    return " ".join(pieces)


@dataclass(frozen=True)
class ContextGlossPair:
    """One scoring unit: a rendered context and one candidate gloss."""

    context: str
    sense: Sense
    sentence_id: str
    target_position: int
    markup: TargetMarkup

    @property
    def gloss(self) -> str:
        return self.sense.gloss


def build_pairs(
    window: ContextWindow,
    candidates: Sequence[Sense],
    markup: TargetMarkup = TargetMarkup.NONE,
) -> list[ContextGlossPair]:
    """One pair per candidate sense, in candidate (rank) order."""
    if not candidates:
        raise ValueError("candidate senses must be non-empty")
    context = render_context(window, markup)
    return [
        ContextGlossPair(
            context=context,
            sense=sense,
            sentence_id=window.sentence_id,
            target_position=window.target_position,
            markup=markup,
        )
        for sense in candidates
    ]


def lookup_candidate_glosses(
    sentence: Sentence,
    target_position: int,
    inventory: SenseInventory,
    lemma_mode: LemmaMode = LemmaMode.GOLD,
    lemma_lookup: Mapping[str, str] | None = None,
) -> tuple[Sense, ...]:
    """Candidate senses for the target token, in the inventory's rank order.

    Gold mode reads the token's gold lemma (:class:`MissingGoldLemma` when
    absent); external mode resolves the surface through ``lemma_lookup``
    (:class:`LemmaNotFound` on a miss). A lemma the inventory simply lacks
    yields an empty tuple rather than an error.
    """
    if not 0 <= target_position < len(sentence.tokens):
        raise ValueError(
            f"sentence {sentence.sentence_id!r} has no token at {target_position}"
        )
    token = sentence.tokens[target_position]
    if not token.token_class.carries_senses:
        raise ValueError(
            f"{token.token_class.value} tokens take the fixed sentinel senses "
            "and are not disambiguated"
        )
    if lemma_mode is LemmaMode.GOLD:
        lemma_id = token.gold_lemma_id
        if lemma_id is None:
            raise MissingGoldLemma(
                f"token {sentence.sentence_id}:{target_position} ({token.surface!r}) "
                "carries no gold lemma"
            )
    elif lemma_mode is LemmaMode.EXTERNAL:
        if lemma_lookup is None:
            raise ValueError("external lemma mode requires a lemma_lookup table")
        lemma_id = lemma_lookup.get(token.surface)
        if lemma_id is None:
            raise LemmaNotFound(
                f"surface {token.surface!r} is not in the lemma lookup table"
            )
    else:
        raise ValueError(f"unknown lemma mode {lemma_mode!r}")
    return inventory.senses_for_lemma(lemma_id)


def score_pairs(scorer, pairs: Sequence[ContextGlossPair]):
    """Run the scorer and enforce the one-score-per-pair, order-aligned contract."""
    scores = scorer.score_pairs(pairs)
    if len(scores) != len(pairs):
        raise ScorerProtocolError(
            f"scorer {getattr(scorer, 'identity', scorer)!r} returned "
            f"{len(scores)} scores for {len(pairs)} pairs"
        )
    for score, pair in zip(scores, pairs):
        if score.sense_id != pair.sense.sense_id:
            raise ScorerProtocolError(
                f"scorer {getattr(scorer, 'identity', scorer)!r} returned score "
                f"for {score.sense_id!r} where {pair.sense.sense_id!r} was expected"
            )
    return list(scores)


def rank_glosses(scores) -> list[str]:
    """Sense ids by descending true-confidence.

    ``scores`` must be listed in candidate (sense-rank) order; the sort is
    stable, so ties keep that order — i.e. ties break toward the lower
    rank_in_lemma.
    """
    if not scores:
        raise ValueError("scores must be non-empty")
    ordered = sorted(scores, key=lambda s: -s.true_confidence)
    return [score.sense_id for score in ordered]


def disambiguate(
    sentence: Sentence,
    target_position: int,
    inventory: SenseInventory,
    scorer,
    window_size: int | None = None,
    markup: TargetMarkup | None = None,
    lemma_mode: LemmaMode = LemmaMode.GOLD,
    lemma_lookup: Mapping[str, str] | None = None,
) -> list[str]:
    """Rank every candidate sense of the target token, best first.

    With ``markup`` omitted the scorer's preferred markup applies. Raises
    :class:`LemmaNotFound` when no candidate senses exist for the target.
    """
    if markup is None:
        markup = getattr(scorer, "preferred_markup", TargetMarkup.NONE)
    candidates = lookup_candidate_glosses(
        sentence, target_position, inventory, lemma_mode, lemma_lookup
    )
    if not candidates:
        token = sentence.tokens[target_position]
        raise LemmaNotFound(
            f"no candidate senses in inventory {inventory.inventory_id!r} for "
            f"token {sentence.sentence_id}:{target_position} ({token.surface!r})"
        )
    window = extract_window(sentence, target_position, window_size)
    pairs = build_pairs(window, candidates, markup)
    return rank_glosses(score_pairs(scorer, pairs))
