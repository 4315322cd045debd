"""Exception types shared across the simulator."""


class QNetSimError(Exception):
    """Base class for all simulator errors."""


class CapacityError(QNetSimError):
    """Requested qubit count exceeds what the backend can hold."""


class BackendMismatchError(QNetSimError):
    """Operation combining states of different backends."""


class EntangledDiscardError(QNetSimError):
    """Attempt to drop a qubit that is still entangled with the rest."""


class DeadHandleError(QNetSimError):
    """Use of a qubit handle after measurement/loss released it."""


class RoutingError(QNetSimError):
    """No channel/link exists for the requested transmission."""


class TraceOrderError(QNetSimError):
    """Trace events emitted in an order the format forbids."""


class FitError(QNetSimError):
    """Regression input does not satisfy the fit's preconditions."""
