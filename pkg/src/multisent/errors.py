"""Exception types shared across the package."""


class MultisentError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MultisentError):
    """A file could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(MultisentError):
    """A parsed value violates the declared schema (unknown label, lang, ...)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ArgumentError(MultisentError, ValueError):
    """An operation was called with invalid arguments."""


class ConfigurationError(MultisentError):
    """Inconsistent configuration (dims, languages, fingerprints, modes)."""


class CoverageError(MultisentError):
    """A bilingual dictionary covers fewer pivot words than requested."""

    def __init__(self, message: str, shortfall: int):
        self.shortfall = shortfall
        super().__init__(message)


class RecordDropError(MultisentError):
    """A record became empty during preprocessing. Carries the record id."""

    def __init__(self, record_id: str, message: str):
        self.record_id = record_id
        super().__init__(f"record {record_id!r}: {message}")


class LeakageError(MultisentError):
    """A held-out test record was consulted while building training artifacts."""
