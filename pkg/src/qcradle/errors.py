"""Exceptions and warnings shared across the package."""


class DesignError(ValueError):
    """Invalid design, chain, or transform request.

    Every instance carries a short machine-readable ``code`` so that callers
    (and the command line) can tell the failure modes apart.
    """

    def __init__(self, code, message):
        super().__init__(f"[{code}] {message}")
        self.code = code
        self.message = message


class SurgeryError(DesignError):
    """A Christoffel step could not be carried out."""


class VerificationError(RuntimeError):
    """Raised when an invariant check fails outright."""


class ConditioningWarning(RuntimeWarning):
    """Intermediate quantities span a range that may cost accuracy."""
