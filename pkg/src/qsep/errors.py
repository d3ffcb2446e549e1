"""Exception hierarchy shared by every layer of the package."""


class QsepError(Exception):
    """Base class for all package errors."""


class DomainError(QsepError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(QsepError):
    """A precondition on an input object was violated (e.g. a non-normalised state)."""


class UsageError(QsepError):
    """An operation was used in a way the object model forbids (e.g. reusing a measured wire)."""


class ResourceError(QsepError):
    """A configured size cap would be exceeded."""

    def __init__(self, message, required=None, limit=None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class CircuitValidationError(QsepError):
    """Structural problems found while validating a circuit.

    ``diagnostics`` holds one entry per violation; each entry names the
    layer and wire(s) involved.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))
