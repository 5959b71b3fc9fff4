"""Exception types shared across the pipeline.

Everything that indicates malformed data or a violated contract derives
from PipelineError; the CLI maps these to exit code 3, OSError to exit
code 2, and argument problems to exit code 1.
"""


class PipelineError(Exception):
    pass


class DuplicateTokenError(PipelineError):
    """A vocabulary file declared the same token string twice."""


class VocabularyError(PipelineError):
    """A required special token (unknown/mask) is missing or unusable."""


class InvalidTokenError(PipelineError):
    """A document contains a token id outside [0, vocab_size)."""


class ShardMismatchError(PipelineError):
    """Tables built with different vocab sizes or windows can't merge."""


class EmptyCountsError(PipelineError):
    """PMI requested over a counts table with no pairs."""


class InvalidPolicyError(PipelineError):
    """Corruption policy probabilities don't sum to 1 or are negative."""


class AlignmentError(PipelineError):
    """Decision stream and document stream disagree on doc ids."""


class UndefinedDeltaError(PipelineError):
    """Convergence delta requested between tables with no common support."""


class FormatError(PipelineError):
    """A binary artifact has a bad magic, version, or truncated payload."""
