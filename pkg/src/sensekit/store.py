"""File-backed annotation store: an append-only log of bulk writes plus a
snapshot that accelerates startup.

The log is the source of truth — replaying it from an empty state
reproduces the live state exactly. Every bulk request becomes exactly one
fsynced JSON line holding the *effects* of the request (writes, removals,
version bumps), so a crash can only lose the request being written, never
leave half of one: an unterminated final line is discarded on replay.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Collection, Mapping, Sequence

from .errors import WriteConflict
from .formats import annotation_from_record, annotation_to_record
from .model import ScoreCategory, ScoredSenseAnnotation

LOG_FILENAME = "annotations.log"
SNAPSHOT_FILENAME = "snapshot.json"

_AnnotationKey = tuple[str, int, str, str, str]
_VersionKey = tuple[str, int, str]  # (sentence_id, token_position, annotator_id)


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class BulkWriteReceipt:
    sequence: int
    written: int
    superseded: int
    versions: dict[tuple[str, int], int]


class AnnotationStore:
    """Thread-safe annotation state with append-only persistence.

    ``clock`` is injectable so tests can produce stable timestamps;
    ``snapshot_every`` > 0 writes a snapshot after that many bulk records.
    """

    def __init__(
        self,
        data_dir: str | Path,
        *,
        clock: Callable[[], str] | None = None,
        snapshot_every: int = 0,
    ):
        self._data_dir = Path(data_dir)
        self._data_dir.mkdir(parents=True, exist_ok=True)
        self._clock = clock or _utc_now
        self._snapshot_every = snapshot_every
        self._lock = threading.RLock()
        self._annotations: dict[_AnnotationKey, ScoredSenseAnnotation] = {}
        self._versions: dict[_VersionKey, int] = {}
        self._sequence = 0
        self._records_since_snapshot = 0
        self._replay()
        self._log_handle = open(self._log_path, "ab")

    @property
    def _log_path(self) -> Path:
        return self._data_dir / LOG_FILENAME

    @property
    def _snapshot_path(self) -> Path:
        return self._data_dir / SNAPSHOT_FILENAME

    # --- persistence ---------------------------------------------------------

    def _replay(self) -> None:
        if self._snapshot_path.exists():
            with open(self._snapshot_path, encoding="utf-8") as handle:
                snapshot = json.load(handle)
            self._sequence = snapshot["sequence"]
            for record in snapshot["annotations"]:
                annotation = annotation_from_record(record)
                self._annotations[annotation.key()] = annotation
            for entry in snapshot["versions"]:
                key = (entry["sentence_id"], entry["token_position"], entry["annotator_id"])
                self._versions[key] = entry["version"]
        if not self._log_path.exists():
            return
        raw = self._log_path.read_bytes()
        lines = raw.split(b"\n")
        # A non-empty final segment is an unterminated (torn) write: discard it.
        complete, torn = lines[:-1], lines[-1]
        del torn
        for index, line in enumerate(complete):
            if not line.strip():
                continue
            try:
                record = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise ValueError(
                    f"{self._log_path}: corrupt log record on line {index + 1} ({exc})"
                ) from None
            if record["sequence"] <= self._sequence:
                continue  # already captured by the snapshot
            self._apply_record(record)

    def _apply_record(self, record: dict) -> None:
        for key_record in record["removes"]:
            self._annotations.pop(
                (
                    key_record["sentence_id"],
                    key_record["token_position"],
                    key_record["inventory_id"],
                    key_record["sense_id"],
                    key_record["annotator_id"],
                ),
                None,
            )
        for annotation_record in record["writes"]:
            annotation = annotation_from_record(annotation_record)
            self._annotations[annotation.key()] = annotation
        for entry in record["versions"]:
            key = (entry["sentence_id"], entry["token_position"], entry["annotator_id"])
            self._versions[key] = entry["version"]
        self._sequence = record["sequence"]

    def _append_record(self, record: dict) -> None:
        line = (json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n").encode(
            "utf-8"
        )
        self._log_handle.write(line)
        self._log_handle.flush()
        os.fsync(self._log_handle.fileno())

    def write_snapshot(self) -> None:
        """Durably capture the current state; the log stays authoritative."""
        with self._lock:
            snapshot = {
                "sequence": self._sequence,
                "annotations": [
                    annotation_to_record(a) for a in self._sorted_annotations()
                ],
                "versions": [
                    {
                        "sentence_id": sid,
                        "token_position": position,
                        "annotator_id": annotator,
                        "version": version,
                    }
                    for (sid, position, annotator), version in sorted(
                        self._versions.items()
                    )
                ],
            }
            tmp_path = self._snapshot_path.with_suffix(".json.tmp")
            with open(tmp_path, "w", encoding="utf-8") as handle:
                json.dump(snapshot, handle, ensure_ascii=False)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_path, self._snapshot_path)
            self._records_since_snapshot = 0

    def close(self) -> None:
        self._log_handle.close()

    def __enter__(self) -> "AnnotationStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # --- reads -----------------------------------------------------------------

    def _sorted_annotations(self) -> list[ScoredSenseAnnotation]:
        return [self._annotations[key] for key in sorted(self._annotations)]

    def annotations(self) -> list[ScoredSenseAnnotation]:
        """A stable-ordered snapshot of the live annotations."""
        with self._lock:
            return self._sorted_annotations()

    def annotations_for_occurrences(
        self, occurrences: Collection[tuple[str, int]]
    ) -> list[ScoredSenseAnnotation]:
        wanted = set(occurrences)
        with self._lock:
            return [
                annotation
                for annotation in self._sorted_annotations()
                if annotation.occurrence in wanted
            ]

    def version(self, sentence_id: str, token_position: int, annotator_id: str) -> int:
        """0 until the annotator first writes to the occurrence."""
        with self._lock:
            return self._versions.get((sentence_id, token_position, annotator_id), 0)

    def annotated_surfaces(self, annotator_id: str, corpus) -> set[str]:
        """Surface forms of every token occurrence the annotator has scored."""
        with self._lock:
            occurrences = {
                annotation.occurrence
                for annotation in self._annotations.values()
                if annotation.annotator_id == annotator_id
            }
        return {
            corpus.token(sentence_id, position).surface
            for sentence_id, position in occurrences
        }

    # --- writes ----------------------------------------------------------------

    def apply_bulk(
        self,
        *,
        annotator_id: str,
        inventory_id: str,
        lemma_id: str,
        scores: Mapping[str, ScoreCategory],
        occurrences: Sequence[tuple[str, int]],
        lemma_sense_ids: Collection[str],
        expected_versions: Mapping[tuple[str, int], int] | None = None,
    ) -> BulkWriteReceipt:
        """Apply one score set to every listed occurrence, atomically.

        Existing scores by the same annotator in the same inventory whose
        sense no longer belongs to ``lemma_sense_ids`` are superseded
        (removed and logged) — that is what a lemma change after scoring
        means. ``expected_versions`` enables optimistic concurrency: a
        mismatch with the stored per-(occurrence, annotator) version raises
        :class:`WriteConflict` and writes nothing.
        """
        if not occurrences:
            raise ValueError("occurrences must be non-empty")
        if not scores:
            raise ValueError("scores must be non-empty")
        unknown = set(scores) - set(lemma_sense_ids)
        if unknown:
            raise ValueError(
                f"scored senses {sorted(unknown)} do not belong to lemma {lemma_id!r}"
            )
        occurrences = list(dict.fromkeys(occurrences))  # dedupe, keep order

        with self._lock:
            if expected_versions is not None:
                conflicts: dict[tuple[str, int], dict[str, int]] = {}
                for occurrence in occurrences:
                    expected = expected_versions.get(occurrence)
                    if expected is None:
                        continue
                    sentence_id, position = occurrence
                    current = self._versions.get((sentence_id, position, annotator_id), 0)
                    if expected != current:
                        conflicts[occurrence] = {
                            "expected": expected,
                            "current": current,
                        }
                if conflicts:
                    raise WriteConflict(
                        f"{len(conflicts)} occurrence(s) changed since they were read",
                        conflicts=conflicts,
                    )

            timestamp = self._clock()
            writes: list[ScoredSenseAnnotation] = []
            removes: list[_AnnotationKey] = []
            new_versions: dict[tuple[str, int], int] = {}
            for sentence_id, position in occurrences:
                for key, annotation in self._annotations.items():
                    if (
                        annotation.sentence_id == sentence_id
                        and annotation.token_position == position
                        and annotation.annotator_id == annotator_id
                        and annotation.inventory_id == inventory_id
                        and annotation.sense_id not in lemma_sense_ids
                    ):
                        removes.append(key)
                for sense_id in sorted(scores):
                    writes.append(
                        ScoredSenseAnnotation(
                            sentence_id=sentence_id,
                            token_position=position,
                            sense_id=sense_id,
                            inventory_id=inventory_id,
                            category=scores[sense_id],
                            annotator_id=annotator_id,
                            timestamp=timestamp,
                        )
                    )
                version_key = (sentence_id, position, annotator_id)
                new_versions[(sentence_id, position)] = (
                    self._versions.get(version_key, 0) + 1
                )

            record = {
                "sequence": self._sequence + 1,
                "kind": "bulk",
                "timestamp": timestamp,
                "annotator_id": annotator_id,
                "inventory_id": inventory_id,
                "lemma_id": lemma_id,
                "removes": [
                    {
                        "sentence_id": key[0],
                        "token_position": key[1],
                        "inventory_id": key[2],
                        "sense_id": key[3],
                        "annotator_id": key[4],
                    }
                    for key in removes
                ],
                "writes": [annotation_to_record(annotation) for annotation in writes],
                "versions": [
                    {
                        "sentence_id": sentence_id,
                        "token_position": position,
                        "annotator_id": annotator_id,
                        "version": version,
                    }
                    for (sentence_id, position), version in new_versions.items()
                ],
            }
            self._append_record(record)  # on failure the state stays untouched
            self._apply_record(record)
            self._records_since_snapshot += 1
            if self._snapshot_every and self._records_since_snapshot >= self._snapshot_every:
                self.write_snapshot()
            return BulkWriteReceipt(
                sequence=self._sequence,
                written=len(writes),
                superseded=len(removes),
                versions=new_versions,
            )

    def import_annotations(
        self, annotations: Sequence[ScoredSenseAnnotation]
    ) -> int:
        """Seed the store from a file, as one atomic log record.

        Versions are bumped once per (occurrence, annotator) touched.
        Returns the number of records written.
        """
        if not annotations:
            return 0
        with self._lock:
            new_versions: dict[_VersionKey, int] = {}
            for annotation in annotations:
                key = (
                    annotation.sentence_id,
                    annotation.token_position,
                    annotation.annotator_id,
                )
                if key not in new_versions:
                    new_versions[key] = self._versions.get(key, 0) + 1
            record = {
                "sequence": self._sequence + 1,
                "kind": "import",
                "timestamp": self._clock(),
                "removes": [],
                "writes": [annotation_to_record(a) for a in annotations],
                "versions": [
                    {
                        "sentence_id": sid,
                        "token_position": position,
                        "annotator_id": annotator,
                        "version": version,
                    }
                    for (sid, position, annotator), version in new_versions.items()
                ],
            }
            self._append_record(record)
            self._apply_record(record)
            self._records_since_snapshot += 1
            return len(annotations)

    def is_empty(self) -> bool:
        with self._lock:
            return not self._annotations
