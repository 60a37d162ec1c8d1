"""Exception hierarchy shared across the toolkit."""


class RspError(Exception):
    """Base class for operational errors (CLI maps these to exit code 1)."""


class InvariantViolation(RspError, ValueError):
    """A domain record failed one of its type invariants."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class StorageError(RspError, OSError):
    pass


class MalformedUrlError(RspError, ValueError):
    pass


class DegenerateDatasetError(RspError, ValueError):
    pass


class DimensionMismatchError(RspError, ValueError):
    pass


class InsufficientLabelSupportError(RspError, ValueError):
    def __init__(self, label: str, count: int, minimum: int):
        self.label = label
        super().__init__(
            f"label {label!r} has {count} training samples, at least {minimum} required"
        )


class EmptyEvaluationSetError(RspError, ValueError):
    pass


class EmptyStoreError(RspError):
    pass


class FetchError(RspError):
    pass


class RateLimited(RspError):
    """Raised by an adapter or transport when the remote side signals a rate limit."""

    def __init__(self, retry_after: float | None = None):
        self.retry_after = retry_after
        super().__init__("rate limit reached")


class AdapterError(RspError):
    pass


class MissingCounterpartError(RspError):
    pass


class UnknownHandleError(RspError, KeyError):
    pass


class RankingFileError(RspError):
    pass


class ConfigError(RspError):
    pass
