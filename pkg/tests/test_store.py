import json

import pytest

from sensekit.errors import WriteConflict
from sensekit.model import ScoreCategory
from sensekit.store import LOG_FILENAME, SNAPSHOT_FILENAME, AnnotationStore

from conftest import ann, make_sentence
from sensekit.model import Corpus


def ticking_clock():
    state = {"n": 0}

    def clock():
        state["n"] += 1
        return f"2025-11-04T00:00:{state['n']:02d}Z"

    return clock


def write_bank(store, *, annotator="a1", expected=None, scores=None):
    return store.apply_bulk(
        annotator_id=annotator,
        inventory_id="inv",
        lemma_id="bank_n",
        scores=scores or {"bank_n.0": ScoreCategory.EXPLICATE, "bank_n.1": ScoreCategory.DIFFERENT},
        occurrences=[("s1", 0), ("s2", 3)],
        lemma_sense_ids=["bank_n.0", "bank_n.1"],
        expected_versions=expected,
    )


def test_bulk_write_and_readback(tmp_path):
    with AnnotationStore(tmp_path, clock=ticking_clock()) as store:
        receipt = write_bank(store)
        assert receipt.sequence == 1
        assert receipt.written == 4  # 2 senses x 2 occurrences
        assert receipt.superseded == 0
        assert receipt.versions == {("s1", 0): 1, ("s2", 3): 1}
        rows = store.annotations()
        assert len(rows) == 4
        assert {a.timestamp for a in rows} == {"2025-11-04T00:00:01Z"}
        assert {a.occurrence for a in rows} == {("s1", 0), ("s2", 3)}


def test_replay_reproduces_state(tmp_path):
    with AnnotationStore(tmp_path, clock=ticking_clock()) as store:
        write_bank(store)
        write_bank(store, annotator="a2")
        before = [a.__dict__ for a in store.annotations()]
        versions = {(k, a) for k in [("s1", 0), ("s2", 3)] for a in ["a1", "a2"]}
        before_versions = {
            (occ, a): store.version(occ[0], occ[1], a) for occ, a in versions
        }

    with AnnotationStore(tmp_path) as reloaded:
        assert [a.__dict__ for a in reloaded.annotations()] == before
        for (occ, a), version in before_versions.items():
            assert reloaded.version(occ[0], occ[1], a) == version
        assert reloaded._sequence == 2


def test_versions_start_at_zero_and_count_bulks(tmp_path):
    with AnnotationStore(tmp_path) as store:
        assert store.version("s1", 0, "a1") == 0
        write_bank(store)
        write_bank(store)
        assert store.version("s1", 0, "a1") == 2
        assert store.version("s1", 0, "other") == 0


def test_stale_expected_version_conflicts_and_writes_nothing(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)  # version -> 1
        before = store.annotations()
        with pytest.raises(WriteConflict) as excinfo:
            write_bank(
                store,
                scores={"bank_n.1": ScoreCategory.GENERAL},
                expected=({("s1", 0): 0, ("s2", 3): 1}),
            )
        assert excinfo.value.conflicts == {("s1", 0): {"expected": 0, "current": 1}}
        assert store.annotations() == before
        assert store.version("s1", 0, "a1") == 1


def test_matching_expected_versions_pass(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
        receipt = write_bank(store, expected={("s1", 0): 1, ("s2", 3): 1})
        assert receipt.versions == {("s1", 0): 2, ("s2", 3): 2}


def test_lemma_change_supersedes_other_lemmas_scores(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)  # a1 scored bank_n senses at ("s1", 0)
        receipt = store.apply_bulk(
            annotator_id="a1",
            inventory_id="inv",
            lemma_id="river_n",
            scores={"river_n.0": ScoreCategory.EXPLICATE},
            occurrences=[("s1", 0)],
            lemma_sense_ids=["river_n.0"],
        )
        assert receipt.superseded == 2  # both bank_n senses removed at that occurrence
        at_occurrence = store.annotations_for_occurrences([("s1", 0)])
        assert {a.sense_id for a in at_occurrence} == {"river_n.0"}
        # the other occurrence keeps its bank_n rows
        rest = store.annotations_for_occurrences([("s2", 3)])
        assert {a.sense_id for a in rest} == {"bank_n.0", "bank_n.1"}


def test_supersession_is_scoped_to_annotator_and_inventory(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store, annotator="a1")
        write_bank(store, annotator="a2")
        store.apply_bulk(
            annotator_id="a1",
            inventory_id="inv2",
            lemma_id="bank_n",
            scores={"bank_n.0": ScoreCategory.GENERAL},
            occurrences=[("s1", 0)],
            lemma_sense_ids=["bank_n.0"],
        )
        receipt = store.apply_bulk(
            annotator_id="a1",
            inventory_id="inv",
            lemma_id="river_n",
            scores={"river_n.0": ScoreCategory.EXPLICATE},
            occurrences=[("s1", 0)],
            lemma_sense_ids=["river_n.0"],
        )
        assert receipt.superseded == 2  # only a1's rows in "inv"
        remaining = store.annotations_for_occurrences([("s1", 0)])
        a2_rows = [a for a in remaining if a.annotator_id == "a2"]
        inv2_rows = [a for a in remaining if a.inventory_id == "inv2"]
        assert len(a2_rows) == 2 and len(inv2_rows) == 1


def test_rejects_scores_outside_the_lemma(tmp_path):
    with AnnotationStore(tmp_path) as store:
        with pytest.raises(ValueError, match="do not belong"):
            store.apply_bulk(
                annotator_id="a1",
                inventory_id="inv",
                lemma_id="bank_n",
                scores={"intruder.0": ScoreCategory.EXPLICATE},
                occurrences=[("s1", 0)],
                lemma_sense_ids=["bank_n.0"],
            )
        with pytest.raises(ValueError, match="non-empty"):
            store.apply_bulk(
                annotator_id="a1",
                inventory_id="inv",
                lemma_id="bank_n",
                scores={},
                occurrences=[("s1", 0)],
                lemma_sense_ids=["bank_n.0"],
            )
        with pytest.raises(ValueError, match="non-empty"):
            store.apply_bulk(
                annotator_id="a1",
                inventory_id="inv",
                lemma_id="bank_n",
                scores={"bank_n.0": ScoreCategory.EXPLICATE},
                occurrences=[],
                lemma_sense_ids=["bank_n.0"],
            )
        assert store.is_empty()


def test_duplicate_occurrences_are_collapsed(tmp_path):
    with AnnotationStore(tmp_path) as store:
        receipt = store.apply_bulk(
            annotator_id="a1",
            inventory_id="inv",
            lemma_id="bank_n",
            scores={"bank_n.0": ScoreCategory.EXPLICATE},
            occurrences=[("s1", 0), ("s1", 0)],
            lemma_sense_ids=["bank_n.0"],
        )
        assert receipt.written == 1
        assert store.version("s1", 0, "a1") == 1


def test_import_is_one_atomic_record(tmp_path):
    seed = [
        ann("s1", 0, "bank_n.0", "inv", 100, "a1", timestamp="t1"),
        ann("s1", 0, "bank_n.1", "inv", 1, "a1", timestamp="t1"),
        ann("s2", 3, "bank_n.0", "inv", 80, "a2", timestamp="t2"),
    ]
    with AnnotationStore(tmp_path, clock=ticking_clock()) as store:
        assert store.is_empty()
        assert store.import_annotations(seed) == 3
        assert store.import_annotations([]) == 0
        assert not store.is_empty()
        # one version bump per (occurrence, annotator), not per row
        assert store.version("s1", 0, "a1") == 1
        assert store.version("s2", 3, "a2") == 1
        # imported timestamps are preserved verbatim
        assert {a.timestamp for a in store.annotations()} == {"t1", "t2"}

    log_lines = (tmp_path / LOG_FILENAME).read_bytes().splitlines()
    assert len(log_lines) == 1


def test_torn_final_line_is_discarded(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
        write_bank(store, annotator="a2")
        state_after_first = None

    log_path = tmp_path / LOG_FILENAME
    raw = log_path.read_bytes()
    first_line_end = raw.index(b"\n") + 1

    with AnnotationStore(tmp_path) as probe:
        probe_state = [a.__dict__ for a in probe.annotations()]

    # chop mid-way through the second record: replay falls back to record one
    log_path.write_bytes(raw[: first_line_end + 25])
    with AnnotationStore(tmp_path) as store:
        assert {a.annotator_id for a in store.annotations()} == {"a1"}
        assert store._sequence == 1
        state_after_first = [a.__dict__ for a in store.annotations()]

    # chop inside the first record: replay yields an empty store
    log_path.write_bytes(raw[: first_line_end - 10])
    with AnnotationStore(tmp_path) as store:
        assert store.is_empty()
        assert store._sequence == 0

    # untouched log still yields the full state
    log_path.write_bytes(raw)
    with AnnotationStore(tmp_path) as store:
        assert [a.__dict__ for a in store.annotations()] == probe_state
    assert state_after_first  # derived above; silences the linter


def test_every_truncation_point_yields_a_record_boundary_state(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
        write_bank(store, annotator="a2")
    log_path = tmp_path / LOG_FILENAME
    raw = log_path.read_bytes()
    first_line_end = raw.index(b"\n") + 1

    for cut in range(first_line_end, len(raw)):
        log_path.write_bytes(raw[:cut])
        with AnnotationStore(tmp_path) as store:
            annotators = {a.annotator_id for a in store.annotations()}
            assert annotators in ({"a1"}, {"a1", "a2"}), f"cut at byte {cut}"
            expected_sequence = 1 if annotators == {"a1"} else 2
            assert store._sequence == expected_sequence


def test_corrupt_complete_line_raises(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
    log_path = tmp_path / LOG_FILENAME
    log_path.write_bytes(b'{"sequence": 1, "nope\n' + log_path.read_bytes())
    with pytest.raises(ValueError, match="line 1"):
        AnnotationStore(tmp_path)


def test_blank_lines_in_log_are_ignored(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
    log_path = tmp_path / LOG_FILENAME
    log_path.write_bytes(b"\n" + log_path.read_bytes() + b"\n")
    with AnnotationStore(tmp_path) as store:
        assert len(store.annotations()) == 4


def test_snapshot_accelerates_startup_without_changing_state(tmp_path):
    clock = ticking_clock()
    with AnnotationStore(tmp_path, clock=clock, snapshot_every=2) as store:
        write_bank(store)
        assert not (tmp_path / SNAPSHOT_FILENAME).exists()
        write_bank(store, annotator="a2")
        assert (tmp_path / SNAPSHOT_FILENAME).exists()
        write_bank(store, annotator="a3")  # lands in the log after the snapshot
        full_state = [a.__dict__ for a in store.annotations()]

    snapshot = json.loads((tmp_path / SNAPSHOT_FILENAME).read_text())
    assert snapshot["sequence"] == 2
    assert len(snapshot["annotations"]) == 8

    with AnnotationStore(tmp_path) as reloaded:
        assert [a.__dict__ for a in reloaded.annotations()] == full_state
        assert reloaded._sequence == 3
        assert reloaded.version("s1", 0, "a3") == 1


def test_explicit_snapshot_roundtrip(tmp_path):
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
        store.write_snapshot()
        state = [a.__dict__ for a in store.annotations()]

    # the log alone and snapshot+log must agree
    with AnnotationStore(tmp_path) as reloaded:
        assert [a.__dict__ for a in reloaded.annotations()] == state
    (tmp_path / SNAPSHOT_FILENAME).unlink()
    with AnnotationStore(tmp_path) as reloaded:
        assert [a.__dict__ for a in reloaded.annotations()] == state


def test_annotated_surfaces(tmp_path):
    corpus = Corpus(
        [
            make_sentence("s1", [("banks", "n", "bank_n"), ("x", "p")]),
            make_sentence("s2", [("a", "f"), ("b", "f"), ("c", "f"), ("bank", "n", "bank_n")]),
        ]
    )
    with AnnotationStore(tmp_path) as store:
        write_bank(store)
        assert store.annotated_surfaces("a1", corpus) == {"banks", "bank"}
        assert store.annotated_surfaces("a2", corpus) == set()
