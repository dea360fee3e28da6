import time

import pytest
from fastapi.testclient import TestClient

from sensekit.model import Corpus
from sensekit.service import ServiceState, create_app
from sensekit.store import AnnotationStore

from conftest import ann, make_inventory, make_sentence


def build_corpus():
    return Corpus(
        [
            make_sentence("s1", [("the", "f"), ("bank", "n", "bank_n"), ("rose", "v", "rise_v")]),
            make_sentence("s2", [("bank", "n", "bank_n"), ("closed", "v", "close_v"), (".", "p")]),
        ]
    )


def build_inventories():
    return {
        "modern": make_inventory("modern", {"bank_n": 2, "rise_v": 1, "close_v": 1}),
        "ghani": make_inventory("ghani", {"bank_g": 1}),
    }


def gold_rows():
    return [
        ann("s1", 1, "bank_n.0", "modern", 100, "g"),
        ann("s1", 1, "bank_n.1", "modern", 1, "g"),
        ann("s1", 2, "rise_v.0", "modern", 100, "g"),
        ann("s2", 0, "bank_n.0", "modern", 80, "g"),
        ann("s2", 1, "close_v.0", "modern", 100, "g"),
    ]


@pytest.fixture
def client_factory(tmp_path):
    stores = []

    def make(annotations=(), assignments=None, lookup=None, ui_dir=None):
        store = AnnotationStore(tmp_path / f"store{len(stores)}")
        stores.append(store)
        if annotations:
            store.import_annotations(list(annotations))
        state = ServiceState(
            corpus=build_corpus(),
            inventories=build_inventories(),
            store=store,
            lemma_lookup=lookup or {},
            assignments=assignments or {},
            ui_dir=ui_dir,
        )
        return TestClient(create_app(state))

    yield make
    for store in stores:
        store.close()


def wait_job(client, job_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        payload = client.get(f"/jobs/{job_id}")
        assert payload.status_code == 200
        body = payload.json()
        if body["status"] != "running":
            return body
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} still running after {timeout}s")


def test_root_info_without_ui(client_factory):
    body = client_factory().get("/").json()
    assert body["sentences"] == 2
    assert body["inventories"] == ["ghani", "modern", "system"]


def test_root_serves_static_ui_when_configured(client_factory, tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<h1>workbench shell</h1>")
    response = client_factory(ui_dir=ui).get("/")
    assert response.status_code == 200
    assert "workbench shell" in response.text


def test_words_search(client_factory):
    client = client_factory()
    assert client.get("/words", params={"query": "bank"}).json() == [
        {"surface": "bank", "count": 2}
    ]
    assert client.get("/words", params={"query": "zzz"}).json() == []
    assert client.get("/words").status_code == 400


def test_contexts_groups_positions_by_sentence(client_factory):
    client = client_factory()
    body = client.get("/contexts", params={"word": "bank"}).json()
    assert body == [
        {"sentence_id": "s1", "tokens": ["the", "bank", "rose"], "positions": [1]},
        {"sentence_id": "s2", "tokens": ["bank", "closed", "."], "positions": [0]},
    ]
    assert client.get("/contexts", params={"word": "nowhere"}).json() == []
    assert client.get("/contexts").status_code == 400


def test_lemma_suggestions_prefer_gold_then_lookup(client_factory):
    client = client_factory(lookup={"bank": "bank_g", "rose": "rise_v"})
    body = client.get("/lemmas/suggest", params={"word": "bank"}).json()
    assert [(s["lemma_id"], s["source"]) for s in body] == [
        ("bank_n", "gold"),
        ("bank_g", "lookup"),
    ]
    assert body[0]["citation_form"] == "bank_n"
    # lookup result that duplicates a gold lemma is not repeated
    rose = client.get("/lemmas/suggest", params={"word": "rose"}).json()
    assert [(s["lemma_id"], s["source"]) for s in rose] == [("rise_v", "gold")]
    assert client.get("/lemmas/suggest").status_code == 400


def test_lemma_search_merges_inventories(client_factory):
    client = client_factory()
    body = client.get("/lemmas/search", params={"query": "bank"}).json()
    assert [entry["lemma_id"] for entry in body] == ["bank_g", "bank_n"]
    assert client.get("/lemmas/search").status_code == 400


def test_lemma_senses_are_grouped_by_inventory(client_factory):
    client = client_factory()
    body = client.get("/lemmas/bank_n/senses").json()
    assert body["lemma_id"] == "bank_n"
    assert set(body["inventories"]) == {"modern", "ghani"}
    assert body["inventories"]["ghani"] == []  # lemma absent there
    senses = body["inventories"]["modern"]
    assert [s["sense_id"] for s in senses] == ["bank_n.0", "bank_n.1"]
    assert senses[0]["rank"] == 0 and senses[0]["proper_noun"] is False
    assert client.get("/lemmas/ghost/senses").status_code == 404


def bulk_body(**overrides):
    body = {
        "annotator_id": "u1",
        "inventory_id": "modern",
        "lemma_id": "bank_n",
        "scores": {"bank_n.0": 100, "bank_n.1": "Different"},
        "occurrences": [
            {"sentence_id": "s1", "token_position": 1},
            {"sentence_id": "s2", "token_position": 0},
        ],
    }
    body.update(overrides)
    return body


def test_bulk_write_receipt_shape(client_factory):
    client = client_factory()
    body = client.post("/annotations/bulk", json=bulk_body()).json()
    assert body["sequence"] == 1
    assert body["written"] == 4
    assert body["superseded"] == 0
    assert body["versions"] == {"s1:1": 1, "s2:0": 1}
    assert body["flags"] == []
    assert body["session"] is None


def test_bulk_write_reports_session_progress(client_factory):
    client = client_factory(assignments={"u1": ["bank", "rose"]})
    body = client.post("/annotations/bulk", json=bulk_body()).json()
    assert body["session"] == {
        "annotator_id": "u1",
        "assigned_words": 2,
        "annotated_words": 1,
    }


def test_bulk_write_returns_advisory_flags(client_factory):
    client = client_factory()
    scores = {"bank_n.0": 100, "bank_n.1": 80}  # two correct-ish senses
    body = client.post("/annotations/bulk", json=bulk_body(scores=scores)).json()
    assert body["written"] == 4  # flags never block the write
    rules = {flag["rule"] for flag in body["flags"]}
    assert rules == {"MultipleCorrectSenses"}
    assert {flag["sentence_id"] for flag in body["flags"]} == {"s1", "s2"}


def test_bulk_write_annotator_header_must_match(client_factory):
    client = client_factory()
    ok = client.post(
        "/annotations/bulk", json=bulk_body(), headers={"X-Annotator-Id": "u1"}
    )
    assert ok.status_code == 200
    bad = client.post(
        "/annotations/bulk", json=bulk_body(), headers={"X-Annotator-Id": "someone-else"}
    )
    assert bad.status_code == 400
    assert "X-Annotator-Id" in bad.json()["detail"]


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"inventory_id": "nope"}, "unknown inventory"),
        ({"inventory_id": "system"}, "unknown inventory"),
        ({"lemma_id": "ghost"}, "no lemma"),
        ({"scores": {"rise_v.0": 100}}, "do not belong"),
        ({"scores": {"bank_n.0": 55}}, "55"),
        ({"occurrences": [{"sentence_id": "zzz", "token_position": 0}]}, "zzz"),
        ({"expected_versions": {"no-colon-number": 0}}, "expected_versions"),
    ],
)
def test_bulk_write_input_errors(client_factory, overrides, fragment):
    response = client_factory().post("/annotations/bulk", json=bulk_body(**overrides))
    assert response.status_code == 400
    assert fragment in str(response.json()["detail"])


def test_bulk_write_optimistic_concurrency(client_factory):
    client = client_factory()
    first = client.post("/annotations/bulk", json=bulk_body()).json()
    assert first["versions"]["s1:1"] == 1

    stale = client.post(
        "/annotations/bulk",
        json=bulk_body(expected_versions={"s1:1": 0, "s2:0": 1}),
    )
    assert stale.status_code == 409
    detail = stale.json()["detail"]
    assert detail["conflicts"] == {"s1:1": {"expected": 0, "current": 1}}

    fresh = client.post(
        "/annotations/bulk",
        json=bulk_body(expected_versions={"s1:1": 1, "s2:0": 1}),
    )
    assert fresh.status_code == 200
    assert fresh.json()["versions"] == {"s1:1": 2, "s2:0": 2}


def test_validation_flags_filterable(client_factory):
    seeded = gold_rows() + [
        ann("s1", 1, "bank_n.0", "modern", 100, "bad"),
        ann("s1", 1, "bank_n.1", "modern", 80, "bad"),
    ]
    client = client_factory(annotations=seeded)
    flags = client.get("/validation/flags").json()
    assert len(flags) == 1
    assert flags[0]["rule"] == "MultipleCorrectSenses"
    assert flags[0]["annotator_id"] == "bad"
    assert client.get("/validation/flags", params={"annotator_id": "g"}).json() == []
    assert client.get("/validation/flags", params={"rule": "ProperNounConflict"}).json() == []
    assert len(client.get("/validation/flags", params={"sentence_id": "s1"}).json()) == 1


def test_iaa_report_endpoint(client_factory):
    seeded = [
        ann("s1", 1, "bank_n.0", "modern", 100, "a1"),
        ann("s1", 1, "bank_n.1", "modern", 1, "a1"),
        ann("s1", 1, "bank_n.0", "modern", 80, "a2"),
        ann("s1", 1, "bank_n.1", "modern", 1, "a2"),
    ]
    client = client_factory(annotations=seeded)
    body = client.get("/iaa/report").json()
    assert len(body["pairs"]) == 1
    pair = body["pairs"][0]
    assert (pair["annotator_a"], pair["annotator_b"]) == ("a1", "a2")
    assert pair["inventory_id"] == "modern"
    assert pair["paired_items"] == 2
    assert pair["unpaired_items"] == 0
    assert pair["kappa"] == 1.0  # same correct/incorrect split on both items
    assert body["summary"]["modern"]["kappa"] == {"mean": 1.0, "std": 0.0}

    explicit = client.get("/iaa/report", params={"pair": "a1,a2", "inventory": "modern"}).json()
    assert explicit["pairs"] == body["pairs"]

    assert client.get("/iaa/report", params={"pair": "justone"}).status_code == 400
    assert client_factory().get("/iaa/report").status_code == 400  # empty store


def test_wsd_evaluation_job_lifecycle(client_factory):
    client = client_factory(annotations=gold_rows())
    accepted = client.post(
        "/wsd/evaluate",
        json={"inventory_id": "modern", "scorer": {"kind": "gold-oracle"}},
    )
    assert accepted.status_code == 200
    job = wait_job(client, accepted.json()["job_id"])
    assert job["status"] == "done"
    result = job["result"]
    assert result["inventory_id"] == "modern"
    assert result["top_k_accuracy"]["1"] == 1.0
    assert result["per_class"]["noun"]["evaluated"] == 2
    assert result["per_class"]["verb"]["evaluated"] == 2


def test_wsd_evaluation_failure_is_reported_not_raised(client_factory):
    # gold is missing for s2 entirely -> the job must fail with a clear error
    partial = [row for row in gold_rows() if row.sentence_id == "s1"]
    client = client_factory(annotations=partial)
    accepted = client.post(
        "/wsd/evaluate",
        json={"inventory_id": "modern", "scorer": {"kind": "gold-oracle"}},
    )
    job = wait_job(client, accepted.json()["job_id"])
    assert job["status"] == "failed"
    assert "IncompleteGold" in job["error"]
    assert "s2:0" in job["error"]


@pytest.mark.parametrize(
    "body_patch",
    [
        {"inventory_id": "nope"},
        {"inventory_id": "system"},
        {"window": "teal"},
        {"markup": "banana"},
        {"lemma_mode": "banana"},
        {"correctness_threshold": 50},
        {"scorer": {"kind": "banana"}},
        {"scorer": {"kind": "remote"}},  # no endpoint
    ],
)
def test_wsd_evaluation_input_errors(client_factory, body_patch):
    body = {"inventory_id": "modern", "scorer": {"kind": "pseudo"}}
    body.update(body_patch)
    assert client_factory().post("/wsd/evaluate", json=body).status_code == 400


def test_unknown_job_is_404(client_factory):
    assert client_factory().get("/jobs/bogus").status_code == 404
