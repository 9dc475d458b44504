"""Exception hierarchy shared by the library and the command line."""


class DistPNRError(Exception):
    """Base class. ``reason`` is a short machine-parsable tag used by the CLI."""

    reason = "error"


class DomainError(DistPNRError, ValueError):
    reason = "domain"


class DispersionRangeError(DistPNRError, ValueError):
    reason = "dispersion-range"


class SingularStackError(DistPNRError, ArithmeticError):
    reason = "singular-stack"


class GeometryError(DistPNRError, ValueError):
    """Operation not defined for the stack termination (e.g. coherent on a mirror)."""

    reason = "unsupported-geometry"


class SearchError(DistPNRError, RuntimeError):
    reason = "search-failure"


class InfeasibleDesignError(DistPNRError, RuntimeError):
    reason = "infeasible-design"


class TruncationError(DistPNRError, ValueError):
    reason = "truncation"

    def __init__(self, message, tail):
        super().__init__(message)
        self.tail = tail


class EnumerationSizeError(DistPNRError, ValueError):
    reason = "enumeration-size"


class SpecFileNotFound(DistPNRError, FileNotFoundError):
    reason = "missing-file"


class SpecSchemaError(DistPNRError, ValueError):
    reason = "schema"


class SpecInvariantError(DistPNRError, ValueError):
    reason = "invariant"


class DispersionTableError(DistPNRError, ValueError):
    reason = "dispersion-table"
