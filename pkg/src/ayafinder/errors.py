"""Exception types raised across the pipeline.

Every error carries the structured fields a caller needs to report the
problem (line numbers, verse references, category names) without parsing
the message text.
"""

from __future__ import annotations


class AyafinderError(Exception):
    """Base class for all errors raised by this package."""


class MalformedLine(AyafinderError):
    """A corpus or mapping file line could not be parsed."""

    def __init__(self, line_no: int, reason: str, path: str | None = None):
        self.line_no = line_no
        self.reason = reason
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"{where}: {reason}")


class CorpusIncomplete(AyafinderError):
    """Loaded verse corpus does not form the complete canonical text."""

    def __init__(self, found_count: int, detail: str = ""):
        self.found_count = found_count
        msg = f"corpus incomplete: found {found_count} verses"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class DuplicateVerse(AyafinderError):
    """The same sura:ayah reference appeared twice in a corpus file."""

    def __init__(self, ref):
        self.ref = ref
        super().__init__(f"duplicate verse reference {ref}")


class UnknownVerseRef(AyafinderError):
    """A mapping row points at a verse reference absent from the corpus."""

    def __init__(self, ref):
        self.ref = ref
        super().__init__(f"unknown verse reference {ref}")


class UnknownCategory(AyafinderError):
    """A category label is not one of the supported topic names."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown category label {name!r}")


class InvalidArtifact(AyafinderError):
    """A serialized corpus artifact is corrupt or has a foreign format."""


class SchemaViolation(AyafinderError):
    """A record file entry is missing a field or has a wrong-typed value."""

    def __init__(self, line_no: int, field: str, reason: str = ""):
        self.line_no = line_no
        self.field = field
        msg = f"line {line_no}: bad field {field!r}"
        if reason:
            msg = f"{msg}: {reason}"
        super().__init__(msg)


class EmptyDataset(AyafinderError):
    """An aggregate was requested over zero events."""


class DegenerateInput(AyafinderError):
    """A statistic is undefined for this input (too few points or zero variance)."""


class UnknownGroupKey(AyafinderError):
    """A grouped aggregation was asked to key on an unsupported field."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"unsupported group key {key!r}")
