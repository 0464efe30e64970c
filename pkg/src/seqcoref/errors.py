"""Exception hierarchy shared across the package.

Every error raised on a user-facing path derives from CorefError so the CLI
can map it to exit code 1 (validation) while unexpected exceptions exit 2.
"""


class CorefError(Exception):
    """Base class for all validation and contract errors."""


# --- corpus / embedding ingestion ---------------------------------------

class MalformedRecord(CorefError):
    """A corpus line violates the record schema or a span invariant."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DanglingArgumentRef(CorefError):
    """An event argument references a mention that is not a same-document entity."""


class DuplicateDocId(CorefError):
    """Two documents share a doc_id."""


class MissingDocument(CorefError):
    """An embedding file does not cover a corpus document."""


class DimMismatch(CorefError):
    """Vector or matrix dimensions disagree."""


class TruncatedFile(CorefError):
    """A binary file ended before its declared payload."""


class CorruptEmbedding(CorefError):
    """An embedding vector contains non-finite components."""


# --- checkpoints ----------------------------------------------------------

class ManifestCorrupt(CorefError):
    """Checkpoint manifest cannot be parsed."""


class ShapeMismatch(CorefError):
    """Checkpoint tensors disagree with the shapes implied by the config."""


# --- cluster state --------------------------------------------------------

class UnknownCluster(CorefError):
    """Reference to a cluster id that does not exist."""


class DuplicateMention(CorefError):
    """A mention was added to the clustering twice."""


class UnknownEntityMention(CorefError):
    """Argument feature references an entity mention missing from the entity clustering."""


# --- engine / trainer -----------------------------------------------------

class MissingGold(CorefError):
    """Teacher forcing requires a gold cluster id that is absent."""


class MissingEntityClusters(CorefError):
    """Event-mode scoring requires an entity clustering."""


class EmptyDocument(CorefError):
    """Loss requested for a document that produced no prediction steps."""


class NonFiniteGradient(CorefError):
    """A gradient tensor contains NaN or infinity."""


# --- topic clustering / metrics -------------------------------------------

class TooFewDocuments(CorefError):
    """K-means requested more clusters than there are documents."""


class CoverageMismatch(CorefError):
    """Two document clusterings cover different document sets."""


class UniverseMismatch(CorefError):
    """Predicted and gold coreference clusterings cover different mentions."""


# --- bench / synthesis ------------------------------------------------------

class BoundViolation(CorefError):
    """An instrumented run exceeded its proven score-count bound."""


class InfeasibleConfig(CorefError):
    """Synthetic corpus configuration cannot be satisfied."""
