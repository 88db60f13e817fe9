"""Exception hierarchy shared across the package."""


class KwAgentError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(KwAgentError, ValueError):
    """Invalid value or input file. ``issues`` holds (line, message) pairs when known."""

    def __init__(self, message, issues=None):
        super().__init__(message)
        self.issues = list(issues or [])


class InvalidKeyword(ValidationError):
    pass


class InvalidKpi(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class NoCategories(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class ParseError(KwAgentError):
    """No JSON object could be located in a model response."""


class SchemaError(KwAgentError):
    """A JSON object was found but does not map names to string arrays."""


class GenerationFailure(KwAgentError):
    """The model kept producing unusable output after all retries."""


class ToolFailure(KwAgentError):
    """A backend (model, search, embedder, KPI source) failed.

    ``retriable`` tells the caller whether repeating the call can help.
    ``report`` is attached by ``run_campaign`` when a campaign aborts midway.
    """

    def __init__(self, message, *, retriable=False, status=None):
        super().__init__(message)
        self.retriable = retriable
        self.status = status
        self.report = None


class AuthError(ToolFailure):
    def __init__(self, message, *, status=None):
        super().__init__(message, retriable=False, status=status)


class ToolTimeout(ToolFailure):
    def __init__(self, message):
        super().__init__(message, retriable=True)


class ToolSchemaError(ToolFailure):
    def __init__(self, message, *, status=None):
        super().__init__(message, retriable=False, status=status)


class SnapshotError(KwAgentError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class CorruptSnapshot(SnapshotError):
    pass
