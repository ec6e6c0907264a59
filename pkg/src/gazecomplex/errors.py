"""Exception hierarchy shared by all modules.

Every expected failure derives from :class:`WorkbenchError` so the service
and CLI can map it to a validation failure (HTTP 422 / exit code 1) while
anything else stays a runtime error (HTTP 500 / exit code 2).
"""


class WorkbenchError(Exception):
    """Base class for all expected, input-related failures."""


class ConlluParseError(WorkbenchError):
    """A CoNLL-U line could not be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TreeStructureError(WorkbenchError):
    """A sentence's head pointers do not form a single rooted tree."""

    def __init__(self, message: str, sentence_id: str):
        super().__init__(f"sentence {sentence_id!r}: {message}")
        self.sentence_id = sentence_id


class LexiconError(WorkbenchError):
    """A frequency lexicon line is malformed or out of range."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DegenerateInputError(WorkbenchError):
    """Input is structurally valid but degenerate for the requested operation."""


class UnparsedSentenceError(WorkbenchError):
    """Structural features were requested for a sentence without a parse."""


class MappingError(WorkbenchError):
    """A fixation refers to a sentence id missing from the boundary map."""


class OrderingError(WorkbenchError):
    """Fixation sequence numbers are not strictly increasing."""


class MissingDataError(WorkbenchError):
    """No participant data available where at least one was required."""


class DegenerateScaleError(WorkbenchError):
    """A metric is constant across the dataset and cannot be min-max scaled."""

    def __init__(self, metric: str):
        super().__init__(f"metric {metric!r} is constant; min-max scale undefined")
        self.metric = metric


class SchemaError(WorkbenchError):
    """A CSV stream is missing required columns."""


class RangeError(WorkbenchError):
    """A numeric field is outside its permitted range."""


class EmbeddingFormatError(WorkbenchError):
    """An embedding file row violates the format contract."""


class AlignmentError(WorkbenchError):
    """Two id-keyed datasets have an empty intersection."""


class ConfigError(WorkbenchError):
    """An experiment config is missing or misusing a field."""
