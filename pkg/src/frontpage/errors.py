"""Exception hierarchy shared across the toolkit.

Every domain error carries a stable ``code`` so the CLI can emit
machine-readable error records.
"""


class FrontpageError(Exception):
    """Base class for all domain errors."""

    code = "error"


# corpus model
class MalformedDocumentError(FrontpageError):
    code = "malformed-document"


class SchemaViolationError(FrontpageError):
    code = "schema-violation"


class DuplicatePageError(FrontpageError):
    code = "duplicate-page"


# teaser detection
class ProfileError(FrontpageError):
    code = "invalid-profile"


class NoReferenceError(FrontpageError):
    code = "no-reference"


class MismatchedIssuesError(FrontpageError):
    code = "mismatched-issues"


# matching
class EmptyCorpusError(FrontpageError):
    code = "empty-corpus"


class DegenerateLabelsError(FrontpageError):
    code = "degenerate-labels"


class ProviderUnavailableError(FrontpageError):
    code = "provider-unavailable"


class CoverageGapError(FrontpageError):
    code = "coverage-gap"


# text metrics
class TooShortError(FrontpageError):
    code = "too-short"


class EmptyInputError(FrontpageError):
    code = "empty-input"


class EmptySourcesError(FrontpageError):
    code = "empty-sources"


# agreement
class InsufficientOverlapError(FrontpageError):
    code = "insufficient-overlap"


class NoVariationError(FrontpageError):
    code = "no-variation"


# llm client
class MissingSlotError(FrontpageError):
    code = "missing-slot"


class EndpointUnavailableError(FrontpageError):
    code = "endpoint-unavailable"


class RateLimitedError(FrontpageError):
    code = "rate-limited"


class UnparseableScoreError(FrontpageError):
    code = "unparseable-score"


# dataset builder
class DanglingReferenceError(FrontpageError):
    code = "dangling-reference"


class EmptyDatasetError(FrontpageError):
    code = "empty-dataset"


# annotation service
class NotAssignedError(FrontpageError):
    code = "not-assigned"


class IncompleteValuesError(FrontpageError):
    code = "incomplete-values"


class DuplicateJudgmentError(FrontpageError):
    code = "duplicate"


class EmptyQueueInputError(FrontpageError):
    code = "empty-input"


# cli
class MissingInputError(FrontpageError):
    code = "missing-input"


class WorkspaceLockedError(FrontpageError):
    code = "workspace-locked"
