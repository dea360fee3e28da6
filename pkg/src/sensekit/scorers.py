"""Verification scorers: the pluggable boundary that assigns true/false
confidences to context-gloss pairs.

Three implementations ship with the package: a gold oracle (upper bound and
harness check, with an inverted adversarial mode), a deterministic
pseudo-scorer for reproducible integration tests, and an HTTP client for
external verification services speaking the wire protocol in FORMATS.md.
"""

from __future__ import annotations

import abc
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import httpx

from .errors import ScorerProtocolError, ScorerUnavailable
from .model import CORRECTNESS_THRESHOLD, ScoredSenseAnnotation
from .wsd import ContextGlossPair, TargetMarkup


@dataclass(frozen=True)
class TsvScore:
    """Confidences that the context and the gloss do / do not share a meaning.

    The two confidences are independent model outputs, not a distribution:
    each must be finite and within [0, 1], but they need not sum to 1, and
    no normalization is ever applied across the pairs of one target.
    """

    sense_id: str
    true_confidence: float
    false_confidence: float

    def __post_init__(self) -> None:
        for name in ("true_confidence", "false_confidence"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value!r}")


class TsvScorer(abc.ABC):
    """Scores context-gloss pairs; deterministic for fixed inputs and config."""

    identity: str = "scorer"
    preferred_markup: TargetMarkup = TargetMarkup.NONE

    @abc.abstractmethod
    def score_pairs(self, pairs: Sequence[ContextGlossPair]) -> list[TsvScore]:
        """One score per pair, order-aligned with the input."""


class GoldOracleScorer(TsvScorer):
    """Scores 1.0 for senses the reference marks correct and 0.0 otherwise.

    ``invert=True`` flips it into an adversarial scorer that buries every
    correct sense — useful as the evaluation harness's lower-bound check.
    """

    def __init__(
        self,
        gold: Mapping[tuple[str, int, str], frozenset[str]],
        invert: bool = False,
    ):
        self._gold = {key: frozenset(values) for key, values in gold.items()}
        self._invert = invert
        self.identity = "adversarial" if invert else "gold-oracle"

    @classmethod
    def from_annotations(
        cls,
        annotations: Sequence[ScoredSenseAnnotation],
        threshold: int = CORRECTNESS_THRESHOLD,
        invert: bool = False,
    ) -> "GoldOracleScorer":
        gold: dict[tuple[str, int, str], set[str]] = {}
        for annotation in annotations:
            if annotation.category.value >= threshold:
                key = (
                    annotation.sentence_id,
                    annotation.token_position,
                    annotation.inventory_id,
                )
                gold.setdefault(key, set()).add(annotation.sense_id)
        return cls({key: frozenset(values) for key, values in gold.items()}, invert)

    def score_pairs(self, pairs: Sequence[ContextGlossPair]) -> list[TsvScore]:
        scores = []
        for pair in pairs:
            key = (pair.sentence_id, pair.target_position, pair.sense.inventory_id)
            is_gold = pair.sense.sense_id in self._gold.get(key, frozenset())
            say_true = is_gold != self._invert
            scores.append(
                TsvScore(
                    sense_id=pair.sense.sense_id,
                    true_confidence=1.0 if say_true else 0.0,
                    false_confidence=0.0 if say_true else 1.0,
                )
            )
        return scores


class DeterministicPseudoScorer(TsvScorer):
    """Stable content-derived confidences for harness and regression tests.

    The confidence is a pure function of (seed, rendered context, gloss
    text) via SHA-256, so runs are reproducible across processes and
    platforms — unlike anything based on Python's salted ``hash``.
    """

    def __init__(self, seed: int | str = 0):
        self._seed = str(seed)
        self.identity = f"pseudo(seed={self._seed})"

    def score_pairs(self, pairs: Sequence[ContextGlossPair]) -> list[TsvScore]:
        return [self._score(pair) for pair in pairs]

    def _score(self, pair: ContextGlossPair) -> TsvScore:
        material = f"{self._seed}\x1f{pair.context}\x1f{pair.gloss}".encode("utf-8")
        digest = hashlib.sha256(material).digest()
        true_confidence = int.from_bytes(digest[:8], "big") / 2**64
        return TsvScore(
            sense_id=pair.sense.sense_id,
            true_confidence=true_confidence,
            false_confidence=1.0 - true_confidence,
        )


class RemoteTsvScorer(TsvScorer):
    """HTTP client for an external verification service.

    Requests carry ``{"context": ..., "gloss": ...}`` and responses
    ``{"true": ..., "false": ...}``; with ``batch_size > 1`` the client
    sends arrays of request objects and expects an order-aligned array
    back. Batches run with at most ``max_in_flight`` concurrent requests,
    each under its own timeout; results are reassembled by batch index, so
    output order never depends on scheduling.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = 10.0,
        batch_size: int = 16,
        max_in_flight: int = 4,
        preferred_markup: TargetMarkup = TargetMarkup.NONE,
        client: httpx.Client | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self._endpoint = endpoint
        self._timeout = timeout
        self._batch_size = batch_size
        self._max_in_flight = max_in_flight
        self.preferred_markup = preferred_markup
        self._client = client or httpx.Client()
        self._owns_client = client is None
        self.identity = f"remote({endpoint})"

    def close(self) -> None:
        if self._owns_client:
            self._client.close()

    def __enter__(self) -> "RemoteTsvScorer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def score_pairs(self, pairs: Sequence[ContextGlossPair]) -> list[TsvScore]:
        if not pairs:
            return []
        chunks = [
            pairs[i : i + self._batch_size]
            for i in range(0, len(pairs), self._batch_size)
        ]
        if len(chunks) == 1:
            return self._score_chunk(chunks[0])
        results: list[list[TsvScore] | None] = [None] * len(chunks)
        workers = min(self._max_in_flight, len(chunks))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(self._score_chunk, chunk): index
                for index, chunk in enumerate(chunks)
            }
            for future, index in futures.items():
                results[index] = future.result()
        flattened: list[TsvScore] = []
        for chunk_scores in results:
            assert chunk_scores is not None
            flattened.extend(chunk_scores)
        return flattened

    def _score_chunk(self, chunk: Sequence[ContextGlossPair]) -> list[TsvScore]:
        payload = [{"context": pair.context, "gloss": pair.gloss} for pair in chunk]
        body = payload[0] if self._batch_size == 1 else payload
        try:
            response = self._client.post(
                self._endpoint, json=body, timeout=self._timeout
            )
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise ScorerUnavailable(f"{self._endpoint}: {exc}") from exc
        if response.status_code >= 500:
            raise ScorerUnavailable(
                f"{self._endpoint}: server returned {response.status_code}"
            )
        if response.status_code != 200:
            raise ScorerProtocolError(
                f"{self._endpoint}: unexpected status {response.status_code}"
            )
        try:
            data = response.json()
        except ValueError as exc:
            raise ScorerProtocolError(f"{self._endpoint}: response is not JSON") from exc
        if isinstance(data, dict):
            data = [data]
        if not isinstance(data, list) or len(data) != len(chunk):
            raise ScorerProtocolError(
                f"{self._endpoint}: expected {len(chunk)} result objects, "
                f"got {type(data).__name__} of length "
                f"{len(data) if isinstance(data, list) else 'n/a'}"
            )
        scores = []
        for pair, item in zip(chunk, data):
            if not isinstance(item, dict):
                raise ScorerProtocolError(f"{self._endpoint}: result item {item!r}")
            try:
                scores.append(
                    TsvScore(
                        sense_id=pair.sense.sense_id,
                        true_confidence=float(item["true"]),
                        false_confidence=float(item["false"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ScorerProtocolError(
                    f"{self._endpoint}: bad result item {item!r} ({exc})"
                ) from exc
        return scores
