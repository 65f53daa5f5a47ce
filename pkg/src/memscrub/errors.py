"""Exception types shared across the pipeline."""

from __future__ import annotations


class MemscrubError(Exception):
    """Base class for all pipeline errors."""


class EmptyMention(MemscrubError):
    """Normalizing a raw mention produced an empty key."""


class OrphanNode(MemscrubError):
    """A node at hop h > 0 was inserted without any hop h-1 parent."""


class EmptyNeighborhood(MemscrubError):
    """Edge weights requested for an empty extraction-count map."""


class SchemaError(MemscrubError):
    """Malformed serialized input; carries the offending field path."""

    def __init__(self, path: str, detail: str = ""):
        self.path = path
        msg = path if not detail else f"{path}: {detail}"
        super().__init__(msg)


class MissingNeighbor(MemscrubError):
    """A neighbor-conditioned prompt was requested without a neighbor."""


class UnrecognizedPrompt(MemscrubError):
    """The synthetic responder did not match the prompt to a known template."""


class ResponderFailure(MemscrubError):
    """A completion backend failed after exhausting its retries."""


class DeadEnd(MemscrubError):
    """A walk reached a node with no usable outgoing edge."""


class IsolatedTarget(MemscrubError):
    """Path sampling requested on a graph whose target has no out-edges."""


class NoNeighbors(MemscrubError):
    """Neighbor-path sampling requested but the target has no out-neighbors."""


class NotAPath(MemscrubError):
    """A node sequence contains a consecutive pair with no stored edge."""


class TooShort(MemscrubError):
    """A path of fewer than two nodes has no edges to score."""


class UnparseableQA(MemscrubError):
    """The responder's QA output could not be parsed after the retry."""


class InfeasibleRatio(MemscrubError):
    """The requested correctness ratio cannot be met with the given labels."""


class EmptyInput(MemscrubError):
    """A metric was called with an empty ranked list or distribution."""


class EmptyReference(MemscrubError):
    """ROUGE-L recall needs at least one reference token."""


class IoFailure(MemscrubError):
    """Writing a dataset artifact failed."""


class ConfigError(MemscrubError):
    """Pipeline configuration is missing, malformed, or inconsistent."""
