"""Exception types shared across the package."""


class TopoDecodeError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(TopoDecodeError, ValueError):
    """An argument broke a precondition (shape, length, parity)."""


class InvalidDistance(TopoDecodeError, ValueError):
    pass


class UnsupportedFamily(TopoDecodeError, ValueError):
    pass


class NotInNormalizer(TopoDecodeError, ValueError):
    pass


class BoundExceeded(TopoDecodeError, RuntimeError):
    pass


class NotDecomposable(TopoDecodeError, ValueError):
    pass


class TooLarge(TopoDecodeError, ValueError):
    pass


class UnreachableSyndrome(TopoDecodeError, ValueError):
    pass


class TooManyDefects(TopoDecodeError, RuntimeError):
    pass


class VersionMismatch(TopoDecodeError, ValueError):
    pass


class CorruptPayload(TopoDecodeError, ValueError):
    pass
