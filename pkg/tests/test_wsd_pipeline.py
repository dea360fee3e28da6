import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensekit.errors import (
    LemmaNotFound,
    MissingGoldLemma,
    ScorerProtocolError,
    ScorerUnavailable,
)
from sensekit.model import Sentence, Token, TokenClass
from sensekit.scorers import (
    DeterministicPseudoScorer,
    GoldOracleScorer,
    RemoteTsvScorer,
    TsvScore,
)
from sensekit.wsd import (
    UNUSED0_MARKER,
    VALID_WINDOW_SIZES,
    ContextGlossPair,
    LemmaMode,
    TargetMarkup,
    build_pairs,
    disambiguate,
    extract_window,
    lookup_candidate_glosses,
    rank_glosses,
    render_context,
    score_pairs,
)

import oracles
from conftest import ann, make_inventory, make_sentence


def sentence_of(n, sentence_id="s"):
    return make_sentence(sentence_id, [(f"w{i}", "n", f"w{i}_n") for i in range(n)])


# --- windows -----------------------------------------------------------------

def test_window_measures_against_oracle_exhaustively():
    for length in range(1, 15):
        sentence = sentence_of(length)
        for position in range(length):
            for size in (*VALID_WINDOW_SIZES, None):
                window = extract_window(sentence, position, size)
                assert len(window.tokens) == oracles.window_length(
                    length, position, size
                ), (length, position, size)
                assert window.tokens[window.target_offset] == f"w{position}"


def test_window_contents_centred():
    window = extract_window(sentence_of(10), 5, 5)
    assert window.tokens == ("w3", "w4", "w5", "w6", "w7")
    assert window.target_offset == 2


def test_window_truncates_left_edge():
    window = extract_window(sentence_of(10), 1, 7)
    assert window.tokens == ("w0", "w1", "w2", "w3", "w4")
    assert window.target_offset == 1


def test_window_never_borrows_across_sentences():
    window = extract_window(sentence_of(3), 2, 11)
    assert window.tokens == ("w0", "w1", "w2")


def test_window_rejects_bad_sizes_and_positions():
    with pytest.raises(ValueError):
        extract_window(sentence_of(5), 0, 4)
    with pytest.raises(ValueError):
        extract_window(sentence_of(5), 0, 13)
    with pytest.raises(ValueError):
        extract_window(sentence_of(5), 5, 3)


# --- rendering -----------------------------------------------------------------

def test_render_markup_variants():
    window = extract_window(sentence_of(5), 2, 3)
    assert render_context(window, TargetMarkup.NONE) == "w1 w2 w3"
    assert render_context(window, TargetMarkup.XML_TOKEN) == "w1 <token>w2</token> w3"
    assert (
        render_context(window, TargetMarkup.UNUSED0)
        == "w1 [UNUSED0] w2 [UNUSED0] w3"
    )


@settings(max_examples=100)
@given(
    st.integers(min_value=1, max_value=12),
    st.sampled_from((*VALID_WINDOW_SIZES, None)),
)
def test_markup_strips_back_to_plain(length, size):
    sentence = sentence_of(length)
    for position in range(length):
        window = extract_window(sentence, position, size)
        plain = render_context(window, TargetMarkup.NONE)
        xml = render_context(window, TargetMarkup.XML_TOKEN)
        unused = render_context(window, TargetMarkup.UNUSED0)
        assert xml.replace("<token>", "").replace("</token>", "") == plain
        assert unused.replace(f"{UNUSED0_MARKER} ", "").replace(
            f" {UNUSED0_MARKER}", ""
        ) == plain


# --- candidate lookup ------------------------------------------------------------

@pytest.fixture
def inventory():
    return make_inventory("inv", {"w0_n": 3, "w1_n": 1})


def test_gold_lookup(inventory):
    sentence = sentence_of(2)
    candidates = lookup_candidate_glosses(sentence, 0, inventory)
    assert [s.sense_id for s in candidates] == ["w0_n.0", "w0_n.1", "w0_n.2"]


def test_gold_lookup_requires_gold_lemma(inventory):
    sentence = make_sentence("s", [("bare", "n")])
    with pytest.raises(MissingGoldLemma):
        lookup_candidate_glosses(sentence, 0, inventory)


def test_external_lookup(inventory):
    sentence = make_sentence("s", [("bare", "n")])
    candidates = lookup_candidate_glosses(
        sentence, 0, inventory, LemmaMode.EXTERNAL, {"bare": "w1_n"}
    )
    assert [s.sense_id for s in candidates] == ["w1_n.0"]
    with pytest.raises(LemmaNotFound):
        lookup_candidate_glosses(sentence, 0, inventory, LemmaMode.EXTERNAL, {})
    with pytest.raises(ValueError):
        lookup_candidate_glosses(sentence, 0, inventory, LemmaMode.EXTERNAL, None)


def test_lookup_unknown_lemma_is_empty_not_an_error(inventory):
    sentence = make_sentence("s", [("x", "n", "ghost_n")])
    assert lookup_candidate_glosses(sentence, 0, inventory) == ()


def test_lookup_rejects_digit_target(inventory):
    sentence = make_sentence("s", [("7", "d")])
    with pytest.raises(ValueError, match="sentinel"):
        lookup_candidate_glosses(sentence, 0, inventory)


# --- scoring and ranking -----------------------------------------------------------

class ListScorer:
    identity = "list"
    preferred_markup = TargetMarkup.NONE

    def __init__(self, scores):
        self._scores = scores

    def score_pairs(self, pairs):
        return self._scores


def _pairs(inventory, n=3):
    window = extract_window(sentence_of(5), 0, 3)
    return build_pairs(window, inventory.senses_for_lemma("w0_n")[:n])


def test_score_pairs_happy_path(inventory):
    pairs = _pairs(inventory)
    scores = [TsvScore(p.sense.sense_id, 0.5, 0.5) for p in pairs]
    assert score_pairs(ListScorer(scores), pairs) == scores


def test_score_pairs_rejects_wrong_count(inventory):
    pairs = _pairs(inventory)
    scores = [TsvScore(p.sense.sense_id, 0.5, 0.5) for p in pairs[:-1]]
    with pytest.raises(ScorerProtocolError, match="2 scores for 3 pairs"):
        score_pairs(ListScorer(scores), pairs)


def test_score_pairs_rejects_misaligned_ids(inventory):
    pairs = _pairs(inventory)
    scores = [TsvScore(p.sense.sense_id, 0.5, 0.5) for p in reversed(pairs)]
    with pytest.raises(ScorerProtocolError, match="w0_n.2"):
        score_pairs(ListScorer(scores), pairs)


def test_rank_glosses_orders_by_confidence():
    scores = [
        TsvScore("a", 0.2, 0.8),
        TsvScore("b", 0.9, 0.1),
        TsvScore("c", 0.5, 0.5),
    ]
    assert rank_glosses(scores) == ["b", "c", "a"]


def test_rank_glosses_ties_keep_candidate_order():
    scores = [
        TsvScore("first", 0.5, 0.5),
        TsvScore("second", 0.5, 0.5),
        TsvScore("third", 0.9, 0.1),
    ]
    assert rank_glosses(scores) == ["third", "first", "second"]
    with pytest.raises(ValueError):
        rank_glosses([])


def test_tsv_score_validates_range():
    with pytest.raises(ValueError):
        TsvScore("x", 1.2, 0.0)
    with pytest.raises(ValueError):
        TsvScore("x", 0.5, float("nan"))


# --- built-in scorers ---------------------------------------------------------------

def test_gold_oracle_and_adversarial(inventory):
    sentence = sentence_of(2)
    annotations = [
        ann("s", 0, "w0_n.1", "inv", 100, "a1"),
        ann("s", 0, "w0_n.0", "inv", 40, "a1"),
    ]
    oracle = GoldOracleScorer.from_annotations(annotations)
    assert disambiguate(sentence, 0, inventory, oracle)[0] == "w0_n.1"

    adversary = GoldOracleScorer.from_annotations(annotations, invert=True)
    ranked = disambiguate(sentence, 0, inventory, adversary)
    assert ranked[-1] == "w0_n.1"
    assert adversary.identity == "adversarial"


def test_pseudo_scorer_is_reproducible(inventory):
    sentence = sentence_of(2)
    first = disambiguate(sentence, 0, inventory, DeterministicPseudoScorer(seed=9))
    second = disambiguate(sentence, 0, inventory, DeterministicPseudoScorer(seed=9))
    assert first == second
    other_window = disambiguate(
        sentence, 0, inventory, DeterministicPseudoScorer(seed=9), window_size=3
    )
    assert sorted(other_window) == sorted(first)


def test_disambiguate_raises_on_no_candidates(inventory):
    sentence = make_sentence("s", [("x", "n", "ghost_n")])
    with pytest.raises(LemmaNotFound):
        disambiguate(sentence, 0, inventory, DeterministicPseudoScorer())


def test_disambiguate_uses_preferred_markup(inventory):
    captured = {}

    class Spy:
        identity = "spy"
        preferred_markup = TargetMarkup.XML_TOKEN

        def score_pairs(self, pairs):
            captured["contexts"] = [p.context for p in pairs]
            return [TsvScore(p.sense.sense_id, 0.5, 0.5) for p in pairs]

    disambiguate(sentence_of(3), 1, inventory, Spy())
    assert all("<token>w1</token>" in c for c in captured["contexts"])


# --- remote scorer -------------------------------------------------------------------

def _remote(handler, **kwargs):
    transport = httpx.MockTransport(handler)
    return RemoteTsvScorer(
        "http://scorer.test/api",
        client=httpx.Client(transport=transport),
        **kwargs,
    )


def test_remote_scorer_batch_protocol(inventory):
    seen_bodies = []

    def handler(request):
        body = json.loads(request.content)
        seen_bodies.append(body)
        assert isinstance(body, list)
        return httpx.Response(
            200, json=[{"true": 0.25, "false": 0.75} for _ in body]
        )

    scorer = _remote(handler, batch_size=2)
    pairs = _pairs(inventory)  # 3 pairs -> chunks of 2 + 1
    scores = scorer.score_pairs(pairs)
    assert [s.sense_id for s in scores] == [p.sense.sense_id for p in pairs]
    assert all(s.true_confidence == 0.25 for s in scores)
    assert [len(b) for b in seen_bodies] == [2, 1]
    assert set(seen_bodies[0][0]) == {"context", "gloss"}


def test_remote_scorer_single_mode_sends_objects(inventory):
    def handler(request):
        body = json.loads(request.content)
        assert isinstance(body, dict)
        return httpx.Response(200, json={"true": 0.8, "false": 0.2})

    scorer = _remote(handler, batch_size=1)
    scores = scorer.score_pairs(_pairs(inventory))
    assert len(scores) == 3 and all(s.true_confidence == 0.8 for s in scores)


def test_remote_scorer_5xx_means_unavailable(inventory):
    scorer = _remote(lambda request: httpx.Response(503))
    with pytest.raises(ScorerUnavailable):
        scorer.score_pairs(_pairs(inventory))


def test_remote_scorer_transport_error_means_unavailable(inventory):
    def handler(request):
        raise httpx.ConnectError("refused")

    with pytest.raises(ScorerUnavailable):
        _remote(handler).score_pairs(_pairs(inventory))


@pytest.mark.parametrize(
    "response",
    [
        httpx.Response(404),
        httpx.Response(200, content=b"not json"),
        httpx.Response(200, json=[{"true": 0.5, "false": 0.5}]),          # short
        httpx.Response(200, json=[{"yes": 1.0}] * 3),                     # bad fields
        httpx.Response(200, json=[{"true": 7.0, "false": 0.0}] * 3),      # out of range
    ],
)
def test_remote_scorer_protocol_violations(inventory, response):
    scorer = _remote(lambda request: response)
    with pytest.raises(ScorerProtocolError):
        scorer.score_pairs(_pairs(inventory))


def test_remote_scorer_reassembles_concurrent_chunks(inventory):
    big = make_inventory("inv", {"w0_n": 12})

    def handler(request):
        body = json.loads(request.content)
        # confidence derived from the gloss index so order is checkable
        out = []
        for item in body:
            index = int(item["gloss"].rsplit(".", 1)[-1])
            out.append({"true": (index + 1) / 100, "false": 0.5})
        return httpx.Response(200, json=out)

    scorer = _remote(handler, batch_size=3, max_in_flight=4)
    window = extract_window(sentence_of(5), 0, 3)
    pairs = build_pairs(window, big.senses_for_lemma("w0_n"))
    scores = scorer.score_pairs(pairs)
    assert [s.sense_id for s in scores] == [f"w0_n.{i}" for i in range(12)]
    assert [s.true_confidence for s in scores] == [
        (i + 1) / 100 for i in range(12)
    ]
