"""Exception hierarchy shared by all gfe_lab modules."""


class GfeError(Exception):
    """Base class for every error raised by gfe_lab."""


class ArityError(GfeError):
    pass


class OutOfTableError(GfeError):
    """A tabulated function was evaluated outside its declared table."""


class CapExceeded(GfeError):
    pass


class EvaluationError(GfeError):
    pass


class NonIsotoneScale(GfeError):
    pass


class UnsupportedStalk(GfeError):
    pass


class UnsupportedNoise(GfeError):
    pass


class DegenerateBox(GfeError):
    pass


class NonFiniteObjective(GfeError):
    pass


class OperationLeavesCarrier(GfeError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(GfeError):
    pass


class DslError(GfeError):
    """Raised for syntax or semantic errors in ``.gfe`` sources."""

    def __init__(self, message, line=None, col=None, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.message = message


class UndeclaredIdentifier(DslError):
    pass


class DslCompileError(DslError):
    pass
