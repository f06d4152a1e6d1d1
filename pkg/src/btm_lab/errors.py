"""Exception hierarchy shared by every module."""


class BTMError(Exception):
    """Base class for all lab errors."""


class InvalidParameter(BTMError, ValueError):
    pass


class PreconditionViolation(BTMError):
    """An operation was called on state that does not satisfy its contract,
    e.g. an unmaterialized interval or a landscape outside the required event."""


class ResourceLimit(BTMError):
    """A configured budget (sites, steps, eigensolver size) would be exceeded.

    ``achieved`` carries the best partial result when there is one.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NumericalFailure(BTMError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
