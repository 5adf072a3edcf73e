"""Exception hierarchy shared by the scoring, ingest and CLI layers."""


class QualityError(ValueError):
    """Base class for every error raised by profilequal."""


class DomainError(QualityError):
    """A model parameter lies outside the domain the model is defined on."""


class ParameterError(DomainError):
    """Model constants are unusable, e.g. credits and penalty both zero."""


class NoScorableRequestsError(QualityError):
    """Scoring was asked for a set with no on-time or late requests."""

    def __init__(self, message="no scorable requests"):
        super().__init__(message)


class ParseError(QualityError):
    """A log line could not be turned into a record."""

    def __init__(self, line, field, message, source=None):
        self.line = line
        self.field = field
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: field {field!r}: {message}")


class ValidationError(QualityError):
    """Too many records failed validation to continue."""

    def __init__(self, rejects, cap):
        self.rejects = list(rejects)
        self.cap = cap
        super().__init__(
            f"{len(self.rejects)} records failed validation (cap {cap})"
        )


class ClassificationError(QualityError):
    """A delivered record has no derivable agreed delivery day."""
