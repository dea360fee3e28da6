"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for every domain error raised by this package."""


class InvalidScoreValue(WorkbenchError):
    """A numeric score is not one of the six legal category values."""


class OverlappingMentions(WorkbenchError):
    """Two entity mentions in one sentence claim the same token."""


class SpanOutOfRange(WorkbenchError):
    """An entity span points outside its sentence."""


class MalformedIOB2(WorkbenchError):
    """An inside tag continues nothing, or continues a different type."""


class UnknownEntityType(WorkbenchError):
    """A tag names an entity type outside the six supported ones."""


class DanglingReference(WorkbenchError):
    """A record points at a sentence, token, lemma, or sense that does not exist."""


class DegenerateMarginals(WorkbenchError):
    """Agreement is undefined: expected agreement saturates while the raters disagree."""


class MissingGoldLemma(WorkbenchError):
    """Gold lemma mode was requested for a token that carries no lemma."""


class LemmaNotFound(WorkbenchError):
    """No lemma (or no candidate senses) could be resolved for a token."""


class ScorerUnavailable(WorkbenchError):
    """The remote verification scorer could not be reached."""


class ScorerProtocolError(WorkbenchError):
    """A verification scorer returned a malformed or misaligned response."""


class IncompleteGold(WorkbenchError):
    """An evaluated token has no reference annotations in the target inventory."""


class WriteConflict(WorkbenchError):
    """An optimistic write lost the race: the stored version moved on."""

    def __init__(self, message: str, conflicts=None):
        super().__init__(message)
        self.conflicts = dict(conflicts or {})
