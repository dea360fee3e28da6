"""Sense-annotation workbench: scored multi-sense labels over dual
inventories, agreement reporting, entity spans, and a gloss-ranking
disambiguation pipeline with an HTTP annotation service on top."""

from .errors import (
    DanglingReference,
    DegenerateMarginals,
    IncompleteGold,
    InvalidScoreValue,
    LemmaNotFound,
    MalformedIOB2,
    MissingGoldLemma,
    OverlappingMentions,
    ScorerProtocolError,
    ScorerUnavailable,
    SpanOutOfRange,
    UnknownEntityType,
    WorkbenchError,
    WriteConflict,
)
from .evaluation import EvaluationConfig, EvaluationReport, SkipReason, evaluate, sweep
from .iaa import (
    ErrorMetric,
    IaaReport,
    Weighting,
    cohen_kappa_thresholded,
    iaa_report,
    pair_agreement,
    paired_scores,
    score_error,
    weighted_kappa,
)
from .iob2 import from_iob2, to_iob2
from .model import (
    CORRECTNESS_THRESHOLD,
    Corpus,
    EntityMention,
    EntityType,
    Lemma,
    ScoreCategory,
    ScoredSenseAnnotation,
    Sense,
    SenseInventory,
    Sentence,
    Token,
    TokenClass,
    category_from_value,
    dedupe_annotations,
    parse_category,
    system_inventory,
    with_system_inventory,
)
from .scorers import DeterministicPseudoScorer, GoldOracleScorer, RemoteTsvScorer, TsvScore
from .store import AnnotationStore, BulkWriteReceipt
from .validation import (
    CorpusStatistics,
    CoverageReport,
    ValidationFlag,
    ValidationRule,
    corpus_statistics,
    coverage_report,
    validate,
)
from .wsd import (
    ContextGlossPair,
    ContextWindow,
    LemmaMode,
    TargetMarkup,
    build_pairs,
    disambiguate,
    extract_window,
    lookup_candidate_glosses,
    rank_glosses,
    render_context,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationStore",
    "BulkWriteReceipt",
    "CORRECTNESS_THRESHOLD",
    "ContextGlossPair",
    "ContextWindow",
    "Corpus",
    "CorpusStatistics",
    "CoverageReport",
    "DanglingReference",
    "DegenerateMarginals",
    "DeterministicPseudoScorer",
    "EntityMention",
    "EntityType",
    "ErrorMetric",
    "EvaluationConfig",
    "EvaluationReport",
    "GoldOracleScorer",
    "IaaReport",
    "IncompleteGold",
    "InvalidScoreValue",
    "Lemma",
    "LemmaMode",
    "LemmaNotFound",
    "MalformedIOB2",
    "MissingGoldLemma",
    "OverlappingMentions",
    "RemoteTsvScorer",
    "ScoreCategory",
    "ScoredSenseAnnotation",
    "ScorerProtocolError",
    "ScorerUnavailable",
    "Sense",
    "SenseInventory",
    "Sentence",
    "SkipReason",
    "SpanOutOfRange",
    "TargetMarkup",
    "Token",
    "TokenClass",
    "TsvScore",
    "UnknownEntityType",
    "ValidationFlag",
    "ValidationRule",
    "Weighting",
    "WorkbenchError",
    "WriteConflict",
    "build_pairs",
    "category_from_value",
    "cohen_kappa_thresholded",
    "corpus_statistics",
    "coverage_report",
    "dedupe_annotations",
    "disambiguate",
    "evaluate",
    "extract_window",
    "from_iob2",
    "iaa_report",
    "lookup_candidate_glosses",
    "pair_agreement",
    "paired_scores",
    "parse_category",
    "rank_glosses",
    "render_context",
    "score_error",
    "sweep",
    "system_inventory",
    "to_iob2",
    "validate",
    "weighted_kappa",
    "with_system_inventory",
]
