"""Exception types shared across the toolkit.

Every error carries enough context to be reported on one line; the CLI maps
ToolkitError subclasses to exit code 1 and argparse usage failures to 2.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit-level failures."""


class EndpointUnreachable(ToolkitError):
    """A remote endpoint failed after the full retry envelope."""


class MalformedResponse(ToolkitError):
    """A remote endpoint answered with a payload we cannot parse."""


class RelationUnknown(ToolkitError):
    """A relation id was not found at its source KG."""


class SchemaViolation(ToolkitError):
    """A dataset line failed validation."""

    def __init__(self, line: int, field: str, message: str) -> None:
        super().__init__(f"line {line}, field {field!r}: {message}")
        self.line = line
        self.field = field


class DuplicateTripleId(ToolkitError):
    """Two dataset examples share a triple id."""

    def __init__(self, triple_id: str, line: int) -> None:
        super().__init__(f"duplicate triple id {triple_id!r} at line {line}")
        self.triple_id = triple_id
        self.line = line


class IOFailure(ToolkitError):
    """A file could not be read or written."""


class EntityNotFound(ToolkitError):
    """Delexicalization could not locate an entity in the text."""

    def __init__(self, slot: str, surface: str) -> None:
        super().__init__(f"{slot} entity {surface!r} not found in text")
        self.slot = slot
        self.surface = surface


class OverlappingEntities(ToolkitError):
    """Head and tail compete for the same span and cannot be separated."""


class DimensionMismatch(ToolkitError):
    """Two vectors of different dimensions were compared."""


class ZeroVector(ToolkitError):
    """A zero-norm vector has no direction to compare."""


class MissingEmbedding(ToolkitError):
    """A label required for the similarity scan has no embedding."""

    def __init__(self, label: str) -> None:
        super().__init__(f"no embedding for label {label!r}")
        self.label = label


class NotEnoughRelations(ToolkitError):
    """A few-shot size exceeds the number of available relations."""


class MissingDescription(ToolkitError):
    """A description-based transform was requested without a description."""


class MarkerCollision(ToolkitError):
    """Content contains a literal marker token and cannot be linearized."""

    def __init__(self, marker: str, content: str) -> None:
        super().__init__(f"content contains literal marker {marker!r}: {content!r}")
        self.marker = marker


class MalformedTemplate(ToolkitError):
    """A verbalization template does not contain each placeholder exactly once."""


class LengthMismatch(ToolkitError):
    """Two aligned sequences differ in length."""


class EmptyCorpus(ToolkitError):
    """A metric was asked to score an empty corpus."""


class NoBigrams(ToolkitError):
    """Conditional bigram entropy is undefined on a corpus with no bigrams."""


class ExternalScorerUnavailable(ToolkitError):
    """The optional external scorer endpoint could not be reached (non-fatal)."""


class PoolEmpty(ToolkitError):
    """The annotation pool has fewer triples than a session needs."""


class OutOfOrder(ToolkitError):
    """A session operation targeted a triple that is not at the cursor."""


class SessionComplete(ToolkitError):
    """A submission arrived for a session that has already finished."""


class UnknownRecord(ToolkitError):
    """A review referenced a record id that does not exist."""


class UnknownSession(ToolkitError):
    """An operation referenced a session id that does not exist."""
