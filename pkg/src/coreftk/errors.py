"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, validation
failures 2, I/O problems 3, network failures 4.
"""


class CoreftkError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CoreftkError):
    """Input violates a documented contract (bad span, bad score, ...)."""


class ParseError(ValidationError):
    """A file failed to parse; message carries the line/record locus."""

    def __init__(self, message, path=None, line=None):
        locus = ""
        if path is not None:
            locus = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{locus}{message}")
        self.path = path
        self.line = line


class NotFoundError(CoreftkError):
    """Lookup by id failed (mention, document, review case, ...)."""


class ConflictError(CoreftkError):
    """A write lost a race, or an export is blocked by unresolved cases."""


class LlmError(CoreftkError):
    """Base class for LLM client failures."""


class LlmTransportError(LlmError):
    """The chat endpoint could not be reached after all retries."""


class UnresolvedPairError(LlmError):
    """The model never produced a parseable verdict for a pair."""
