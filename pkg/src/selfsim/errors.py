"""Shared exception types."""


class BudgetExceededError(RuntimeError):
    """An operation would materialize more pieces than the configured budget allows."""


class IFSValidationError(ValueError):
    """An IFS definition violates a structural invariant (k, scales, orthogonality, ...)."""


class RenderError(ValueError):
    """Rendering was requested for an unsupported configuration."""


class ConsistencyViolationError(RuntimeError):
    """A theorem implication was violated by computed verdicts.

    This never indicates a property of the input system; it means one of the
    geometric decision procedures produced an unsound answer.  The offending
    implication and the full verdict set are attached for diagnosis.
    """

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}
