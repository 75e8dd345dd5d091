"""Exception types shared across the pipeline."""


class ConceptMinerError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(ConceptMinerError):
    """Corpus file is malformed (bad JSON line, missing field, empty file)."""


class ValidationError(ConceptMinerError):
    """Data violates an invariant (duplicate ids, label conflicts, bad spans)."""


class InterchangeLookupError(ConceptMinerError):
    """A parse or embedding interchange file is missing a required entry."""


class InterchangeFormatError(ConceptMinerError):
    """An interchange or matrix file does not match its schema."""


class ConfigError(ConceptMinerError):
    """A configuration value is outside its documented domain."""


class DegenerateTaskError(ConceptMinerError):
    """The data cannot support the requested computation (e.g. single-class labels)."""


class StageError(ConceptMinerError):
    """A pipeline stage failed; carries the stage name and the original cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
