"""Exception types raised by csent."""


class CsentError(Exception):
    """Base class for all library errors."""


class LabelError(CsentError, KeyError):
    """A subsystem label is unknown or duplicated."""

    def __str__(self):
        return Exception.__str__(self)


class ShapeError(CsentError, ValueError):
    """Matrix shapes or subsystem dimensions do not fit together."""


class NotPSDError(CsentError, ValueError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class NormalizationError(CsentError, ValueError):
    """A state vector or density matrix is not normalized."""


class DomainError(CsentError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedKindError(CsentError, ValueError):
    """The requested distance kind is not accepted by an optimizer."""


class InstrumentError(CsentError, ValueError):
    """Kraus operators of an instrument violate completeness."""


class ClassicalityError(CsentError, ValueError):
    """A flag register that should be classical carries coherences."""
