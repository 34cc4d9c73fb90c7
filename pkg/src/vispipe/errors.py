"""Exception types shared across the vispipe package.

Every error carries a machine-readable ``code`` (its class name) so the HTTP
service and CLI can map failures to stable identifiers without string
matching on messages.
"""

from __future__ import annotations


class VispipeError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- corpus / case loading ---------------------------------------------------

class MissingFileError(VispipeError):
    """An example or case directory lacks a required file."""


class MetaMismatchError(VispipeError):
    """meta.json module list disagrees with module extraction.

    Carries both lists so the conflict can be reported verbatim.
    """

    def __init__(self, entry_id: str, meta_modules: list[str], extracted: list[str]):
        self.entry_id = entry_id
        self.meta_modules = meta_modules
        self.extracted = extracted
        super().__init__(
            f"meta.json for '{entry_id}' lists modules {meta_modules} "
            f"but extraction found {extracted}"
        )


class DuplicateIdError(VispipeError):
    """Two example or case directories resolve to the same id."""


# --- planning ----------------------------------------------------------------

class PlanParseError(VispipeError):
    """Model output could not be parsed into the plan schema."""

    def __init__(self, message: str, raw_output: str = ""):
        self.raw_output = raw_output
        super().__init__(message)


class PlanValidationError(VispipeError):
    """Plan parsed but violates node or plan invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid pipeline plan: {detail}")


class OutOfRangeError(VispipeError):
    """A weight falls outside the allowed [1, 10] interval."""


# --- retrieval ---------------------------------------------------------------

class EmptyCorpusError(VispipeError):
    """Retrieval was attempted against a corpus with zero entries."""


class BaselineParseError(VispipeError):
    """Semantic-baseline model output yielded no usable id ranking."""

    def __init__(self, message: str, raw_output: str = ""):
        self.raw_output = raw_output
        super().__init__(message)


# --- generation --------------------------------------------------------------

class ExtractionError(VispipeError):
    """No HTML document could be extracted from model output."""

    def __init__(self, message: str, raw_output: str = ""):
        self.raw_output = raw_output
        super().__init__(message)


class ArtifactInvariantError(VispipeError):
    """Extracted document violates the generated-artifact contract."""


# --- evaluation --------------------------------------------------------------

class GradeParseError(VispipeError):
    """Grader output missing scores or reasoning."""

    def __init__(self, message: str, raw_output: str = ""):
        self.raw_output = raw_output
        super().__init__(message)


class ScoreOutOfRangeError(VispipeError):
    """Grader emitted a score outside [0.0, 1.0]."""


# --- LLM client --------------------------------------------------------------

class LlmTransportError(VispipeError):
    """Network, HTTP, or timeout failure talking to a provider."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class LlmProtocolError(VispipeError):
    """Provider payload (or fixture lookup) could not be interpreted."""


class MissingCredentialError(VispipeError):
    """Backend requires an API key env var that is not set."""


# --- service / storage ---------------------------------------------------

class StageOrderError(VispipeError):
    """A session operation ran before its prerequisite stage."""

    def __init__(self, message: str, missing_stage: str | None = None, variant: str = ""):
        self.missing_stage = missing_stage
        self.variant = variant
        super().__init__(message)


class NotFoundError(VispipeError):
    """Unknown session or corpus entry id."""


class StorageError(VispipeError):
    """Session store could not read or write its backing files."""
