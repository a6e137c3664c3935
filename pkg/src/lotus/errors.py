"""Exception hierarchy shared by every stage of the harness."""


class LotusError(Exception):
    """Base class for all harness errors."""


class SchemaError(LotusError, ValueError):
    """Input file does not have the expected columns."""


class ValidationError(LotusError, ValueError):
    """A value violates a domain constraint (label domain, duplicate id, ...)."""


class DataError(LotusError, ValueError):
    """Pipeline data is incomplete, e.g. an empty explanation."""


class ConsistencyError(LotusError, ValueError):
    """Two inputs that must line up do not (ids, pairs, labels)."""


class ContentError(LotusError, ValueError):
    """A backend answered but the payload is unusable."""


class BackendError(LotusError, RuntimeError):
    """An explanation backend failed (timeout, non-zero exit, HTTP error).

    Carries the id of the example being explained so the caller can retry it.
    """

    def __init__(self, message: str, example_id: str | None = None):
        super().__init__(message if example_id is None else f"{message} [example {example_id}]")
        self.example_id = example_id


class StageError(LotusError):
    """Wraps an error raised inside a pipeline stage, naming that stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
