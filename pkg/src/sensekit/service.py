"""HTTP service for live annotation work: word and context retrieval,
lemma search, sense listing grouped by inventory, atomic bulk score writes
with immediate advisory flags, and report endpoints.

Writes persist through :class:`sensekit.store.AnnotationStore`; everything
else is read-only over the loaded corpus and inventories. Validation flags
never block a write — they ride back on the response for the UI to show.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import evaluation as evaluation_mod
from .errors import InvalidScoreValue, WorkbenchError, WriteConflict
from .iaa import iaa_report
from .model import (
    Corpus,
    EntityMention,
    ScoredSenseAnnotation,
    SenseInventory,
    SYSTEM_INVENTORY_ID,
    parse_category,
    with_system_inventory,
)
from .scorers import DeterministicPseudoScorer, GoldOracleScorer, RemoteTsvScorer
from .store import AnnotationStore
from .validation import ValidationFlag, validate
from .wsd import LemmaMode, TargetMarkup


class OccurrenceBody(BaseModel):
    sentence_id: str
    token_position: int


class BulkScoreBody(BaseModel):
    annotator_id: str
    inventory_id: str
    lemma_id: str
    scores: dict[str, int | str] = Field(min_length=1)
    occurrences: list[OccurrenceBody] = Field(min_length=1)
    # "sentence_id:token_position" -> version last seen by the client
    expected_versions: dict[str, int] | None = None


class ScorerSpec(BaseModel):
    kind: str  # gold-oracle | adversarial | pseudo | remote
    seed: int | str = 0
    endpoint: str | None = None
    timeout: float = 10.0
    batch_size: int = 16
    max_in_flight: int = 4


class EvaluateBody(BaseModel):
    inventory_id: str
    scorer: ScorerSpec
    window: int | str | None = 11
    markup: str | None = None
    lemma_mode: str = "gold"
    correctness_threshold: int = 60
    include_function_words: bool = True


@dataclass
class ServiceState:
    corpus: Corpus
    inventories: Mapping[str, SenseInventory]
    store: AnnotationStore
    lemma_lookup: Mapping[str, str] = field(default_factory=dict)
    assignments: Mapping[str, Sequence[str]] = field(default_factory=dict)
    mentions: Sequence[EntityMention] = ()
    ui_dir: Path | None = None

    def __post_init__(self) -> None:
        self.inventories = with_system_inventory(self.inventories)
        self.word_index: dict[str, list[tuple[str, int]]] = {}
        for sentence, token in self.corpus.tokens():
            self.word_index.setdefault(token.surface, []).append(
                (sentence.sentence_id, token.position)
            )


class JobRegistry:
    """Tiny background-job table for long-running evaluations."""

    def __init__(self, workers: int = 2):
        self._executor = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, dict] = {}
        self._lock = threading.Lock()

    def submit(self, fn) -> str:
        job_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._jobs[job_id] = {"status": "running"}

        def run() -> None:
            try:
                result = fn()
            except Exception as exc:  # failures are reported, never raised
                with self._lock:
                    self._jobs[job_id] = {
                        "status": "failed",
                        "error": f"{type(exc).__name__}: {exc}",
                    }
            else:
                with self._lock:
                    self._jobs[job_id] = {"status": "done", "result": result}

        self._executor.submit(run)
        return job_id

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            job = self._jobs.get(job_id)
            return dict(job) if job is not None else None


def _flag_record(flag: ValidationFlag) -> dict:
    return {
        "rule": flag.rule.value,
        "sentence_id": flag.sentence_id,
        "token_position": flag.token_position,
        "inventory_id": flag.inventory_id,
        "annotator_id": flag.annotator_id,
        "details": flag.details,
    }


def _sense_record(sense) -> dict:
    return {
        "sense_id": sense.sense_id,
        "gloss": sense.gloss,
        "rank": sense.rank_in_lemma,
        "proper_noun": sense.is_proper_noun,
    }


def _occurrence_key(sentence_id: str, position: int) -> str:
    return f"{sentence_id}:{position}"


def _build_scorer(spec: ScorerSpec, state: ServiceState):
    if spec.kind in ("gold-oracle", "adversarial"):
        return GoldOracleScorer.from_annotations(
            state.store.annotations(), invert=spec.kind == "adversarial"
        )
    if spec.kind == "pseudo":
        return DeterministicPseudoScorer(seed=spec.seed)
    if spec.kind == "remote":
        if not spec.endpoint:
            raise HTTPException(status_code=400, detail="remote scorer needs an endpoint")
        return RemoteTsvScorer(
            spec.endpoint,
            timeout=spec.timeout,
            batch_size=spec.batch_size,
            max_in_flight=spec.max_in_flight,
        )
    raise HTTPException(status_code=400, detail=f"unknown scorer kind {spec.kind!r}")


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="sense annotation service")
    jobs = JobRegistry()
    rule_inventories = {
        inventory_id: inventory
        for inventory_id, inventory in state.inventories.items()
        if inventory_id != SYSTEM_INVENTORY_ID
    }

    @app.get("/words")
    def words(query: str = Query(default="")) -> list[dict]:
        """Surface forms matching the query, with occurrence counts."""
        if not query:
            raise HTTPException(status_code=400, detail="query must be non-empty")
        return [
            {"surface": surface, "count": len(occurrences)}
            for surface, occurrences in sorted(state.word_index.items())
            if query in surface
        ]

    @app.get("/contexts")
    def contexts(word: str = Query(default="")) -> list[dict]:
        """Every sentence containing the word, with its target positions."""
        if not word:
            raise HTTPException(status_code=400, detail="word must be non-empty")
        by_sentence: dict[str, list[int]] = {}
        for sentence_id, position in state.word_index.get(word, []):
            by_sentence.setdefault(sentence_id, []).append(position)
        return [
            {
                "sentence_id": sentence_id,
                "tokens": list(state.corpus.sentence(sentence_id).surfaces()),
                "positions": sorted(positions),
            }
            for sentence_id, positions in sorted(by_sentence.items())
        ]

    @app.get("/lemmas/suggest")
    def lemmas_suggest(word: str = Query(default="")) -> list[dict]:
        """Lemma candidates for a surface: gold lemmas first (by frequency),
        then the external lookup table."""
        if not word:
            raise HTTPException(status_code=400, detail="word must be non-empty")
        gold_counts: dict[str, int] = {}
        for sentence_id, position in state.word_index.get(word, []):
            token = state.corpus.token(sentence_id, position)
            if token.gold_lemma_id:
                gold_counts[token.gold_lemma_id] = gold_counts.get(token.gold_lemma_id, 0) + 1
        suggestions = [
            (lemma_id, "gold")
            for lemma_id, _ in sorted(gold_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        ]
        looked_up = state.lemma_lookup.get(word)
        if looked_up and looked_up not in gold_counts:
            suggestions.append((looked_up, "lookup"))
        out = []
        for lemma_id, source in suggestions:
            citation, pos = lemma_id, ""
            for inventory in rule_inventories.values():
                lemma = inventory.get_lemma(lemma_id)
                if lemma is not None:
                    citation, pos = lemma.citation_form, lemma.pos
                    break
            out.append(
                {"lemma_id": lemma_id, "citation_form": citation, "pos": pos, "source": source}
            )
        return out

    @app.get("/lemmas/search")
    def lemmas_search(query: str = Query(default="")) -> list[dict]:
        """Substring search over citation forms across all inventories."""
        if not query:
            raise HTTPException(status_code=400, detail="query must be non-empty")
        seen: dict[str, dict] = {}
        for inventory_id in sorted(rule_inventories):
            for lemma in rule_inventories[inventory_id].search_lemmas(query):
                seen.setdefault(
                    lemma.lemma_id,
                    {
                        "lemma_id": lemma.lemma_id,
                        "citation_form": lemma.citation_form,
                        "pos": lemma.pos,
                    },
                )
        return [seen[lemma_id] for lemma_id in sorted(seen)]

    @app.get("/lemmas/{lemma_id}/senses")
    def lemma_senses(lemma_id: str) -> dict:
        """The lemma's senses grouped by inventory; groups may be empty."""
        grouped = {
            inventory_id: [
                _sense_record(sense)
                for sense in rule_inventories[inventory_id].senses_for_lemma(lemma_id)
            ]
            for inventory_id in sorted(rule_inventories)
        }
        if not any(
            inventory.has_lemma(lemma_id) for inventory in rule_inventories.values()
        ):
            raise HTTPException(status_code=404, detail=f"unknown lemma {lemma_id!r}")
        return {"lemma_id": lemma_id, "inventories": grouped}

    @app.post("/annotations/bulk")
    def annotations_bulk(body: BulkScoreBody, request: Request) -> dict:
        """Apply one score set to many occurrences of a word, atomically.

        Optimistic concurrency: stale expected versions get 409 plus the
        current versions. The response carries fresh advisory flags for the
        affected occurrences and, when assignments are configured, the
        annotator's progress.
        """
        header_annotator = request.headers.get("X-Annotator-Id")
        if header_annotator is not None and header_annotator != body.annotator_id:
            raise HTTPException(
                status_code=400,
                detail="X-Annotator-Id header does not match the request body",
            )
        inventory = state.inventories.get(body.inventory_id)
        if inventory is None or body.inventory_id == SYSTEM_INVENTORY_ID:
            raise HTTPException(
                status_code=400, detail=f"unknown inventory {body.inventory_id!r}"
            )
        if not inventory.has_lemma(body.lemma_id):
            raise HTTPException(
                status_code=400,
                detail=f"inventory {body.inventory_id!r} has no lemma {body.lemma_id!r}",
            )
        lemma_sense_ids = {
            sense.sense_id for sense in inventory.senses_for_lemma(body.lemma_id)
        }
        try:
            scores = {
                sense_id: parse_category(raw) for sense_id, raw in body.scores.items()
            }
        except InvalidScoreValue as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        unknown_senses = set(scores) - lemma_sense_ids
        if unknown_senses:
            raise HTTPException(
                status_code=400,
                detail=f"senses {sorted(unknown_senses)} do not belong to lemma "
                f"{body.lemma_id!r} in inventory {body.inventory_id!r}",
            )
        occurrences = []
        for occ in body.occurrences:
            try:
                state.corpus.token(occ.sentence_id, occ.token_position)
            except WorkbenchError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            occurrences.append((occ.sentence_id, occ.token_position))
        expected = None
        if body.expected_versions is not None:
            expected = {}
            for key, version in body.expected_versions.items():
                sentence_id, _, position = key.rpartition(":")
                if not sentence_id or not position.isdigit():
                    raise HTTPException(
                        status_code=400,
                        detail=f"bad expected_versions key {key!r}; "
                        "use 'sentence_id:token_position'",
                    )
                expected[(sentence_id, int(position))] = version

        try:
            receipt = state.store.apply_bulk(
                annotator_id=body.annotator_id,
                inventory_id=body.inventory_id,
                lemma_id=body.lemma_id,
                scores=scores,
                occurrences=occurrences,
                lemma_sense_ids=lemma_sense_ids,
                expected_versions=expected,
            )
        except WriteConflict as exc:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": str(exc),
                    "conflicts": {
                        _occurrence_key(sid, position): info
                        for (sid, position), info in exc.conflicts.items()
                    },
                },
            ) from None

        affected = state.store.annotations_for_occurrences(occurrences)
        flags = validate(state.corpus, affected, state.inventories)

        session = None
        assigned = state.assignments.get(body.annotator_id)
        if assigned is not None:
            annotated = state.store.annotated_surfaces(body.annotator_id, state.corpus)
            session = {
                "annotator_id": body.annotator_id,
                "assigned_words": len(assigned),
                "annotated_words": len(annotated & set(assigned)),
            }

        return {
            "sequence": receipt.sequence,
            "written": receipt.written,
            "superseded": receipt.superseded,
            "versions": {
                _occurrence_key(sid, position): version
                for (sid, position), version in receipt.versions.items()
            },
            "flags": [_flag_record(flag) for flag in flags],
            "session": session,
        }

    @app.get("/validation/flags")
    def validation_flags(
        sentence_id: str | None = None,
        annotator_id: str | None = None,
        inventory_id: str | None = None,
        rule: str | None = None,
    ) -> list[dict]:
        """Advisory flags over the whole store, optionally filtered."""
        flags = validate(state.corpus, state.store.annotations(), state.inventories)
        out = []
        for flag in flags:
            if sentence_id is not None and flag.sentence_id != sentence_id:
                continue
            if annotator_id is not None and flag.annotator_id != annotator_id:
                continue
            if inventory_id is not None and flag.inventory_id != inventory_id:
                continue
            if rule is not None and flag.rule.value != rule:
                continue
            out.append(_flag_record(flag))
        return out

    @app.get("/iaa/report")
    def iaa_endpoint(
        pair: str | None = None, inventory: str | None = None
    ) -> dict:
        """Agreement metrics over the store's double-annotated items."""
        annotator_pairs = None
        if pair is not None:
            names = [name.strip() for name in pair.split(",")]
            if len(names) != 2 or not all(names):
                raise HTTPException(
                    status_code=400, detail="pair must be 'annotator_a,annotator_b'"
                )
            annotator_pairs = [(names[0], names[1])]
        inventory_ids = [inventory] if inventory else None
        try:
            report = iaa_report(
                state.store.annotations(),
                annotator_pairs=annotator_pairs,
                inventory_ids=inventory_ids,
            )
        except (ValueError, WorkbenchError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {
            "pairs": [
                {
                    "annotator_a": r.annotator_a,
                    "annotator_b": r.annotator_b,
                    "inventory_id": r.inventory_id,
                    "paired_items": r.paired_items,
                    "unpaired_items": r.unpaired_items,
                    "kappa": r.kappa,
                    "lwk": r.lwk,
                    "qwk": r.qwk,
                    "mae": r.mae,
                    "rmse": r.rmse,
                }
                for r in report.pair_results
            ],
            "summary": {
                inventory_id: {
                    name: {"mean": summary.mean, "std": summary.std}
                    for name, summary in report.summary(inventory_id).items()
                }
                for inventory_id in report.inventories()
            },
        }

    @app.post("/wsd/evaluate")
    def wsd_evaluate(body: EvaluateBody) -> dict:
        """Kick off an evaluation run; poll /jobs/{job_id} for the result."""
        inventory = state.inventories.get(body.inventory_id)
        if inventory is None or body.inventory_id == SYSTEM_INVENTORY_ID:
            raise HTTPException(
                status_code=400, detail=f"unknown inventory {body.inventory_id!r}"
            )
        window: int | None
        if body.window in (None, "all", "All"):
            window = None
        else:
            try:
                window = int(body.window)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                raise HTTPException(
                    status_code=400, detail=f"bad window {body.window!r}"
                ) from None
        try:
            markup = TargetMarkup(body.markup) if body.markup else None
            lemma_mode = LemmaMode(body.lemma_mode)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        try:
            config = evaluation_mod.EvaluationConfig(
                inventory_id=body.inventory_id,
                window_size=window,
                markup=markup,
                lemma_mode=lemma_mode,
                correctness_threshold=body.correctness_threshold,
                include_function_words=body.include_function_words,
            )
        except (InvalidScoreValue, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        scorer = _build_scorer(body.scorer, state)
        annotations = state.store.annotations()

        def run() -> dict:
            report = evaluation_mod.evaluate(
                state.corpus,
                annotations,
                inventory,
                scorer,
                config,
                mentions=state.mentions,
                lemma_lookup=state.lemma_lookup,
            )
            return report.to_record()

        return {"job_id": jobs.submit(run)}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str) -> dict:
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return {"job_id": job_id, **job}

    if state.ui_dir is not None:
        app.mount("/", StaticFiles(directory=state.ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def root() -> dict:
            return {
                "service": "sense annotation service",
                "sentences": len(state.corpus),
                "inventories": sorted(state.inventories),
            }

    return app
