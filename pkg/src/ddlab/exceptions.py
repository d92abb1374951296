"""Exception types raised across the package."""


class InputError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ContractError(ValueError):
    """Arguments are individually valid but inconsistent with each other
    (for example a design matrix and targets with different row counts)."""


class FormatError(ValueError):
    """A file or serialized document does not follow its declared format.

    Parameters
    ----------
    message : str
        Human readable description.
    offset : int, optional
        Byte offset at which the problem was detected, when meaningful.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SchemaVersionError(FormatError):
    """A result document was written by a newer schema than this reader."""


class DivergentStepWarning(RuntimeWarning):
    """Gradient descent step size exceeds the stability limit 2 / s_max**2."""
