"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CircuitForgeError(Exception):
    """Base class for all library errors."""


class LabelError(CircuitForgeError, KeyError):
    """Unknown, duplicate or otherwise invalid element label."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class OracleSizeError(CircuitForgeError):
    """Input exceeds the configured brute-force cap."""


class NotCycleSpaceError(CircuitForgeError):
    """Set is not a disjoint union of circuits."""


class UnknownBuiltinError(CircuitForgeError, KeyError):
    """Requested built-in matroid does not exist."""


class UnsupportedLoopError(CircuitForgeError):
    """Graph has a self-loop where none is allowed."""


class DisconnectedError(CircuitForgeError):
    """Graph is required to be connected."""


class PreconditionError(CircuitForgeError):
    """An operation's documented precondition does not hold."""


class EmptySelectionError(PreconditionError):
    """Small Cut selection phase found no admissible cut-set."""


class SumShapeError(CircuitForgeError):
    """Shared set of a k-sum has a size other than 0, 1 or 3."""


class SumValidityError(CircuitForgeError):
    """A side condition of a 2-sum or 3-sum fails."""

    def __init__(self, message: str, clause: str = "", edge: tuple | None = None):
        super().__init__(message)
        self.clause = clause
        self.edge = edge


class NotCircuitError(CircuitForgeError):
    """Set is not a circuit of the relevant matroid."""


class GenerationError(CircuitForgeError):
    """Random instance generation gave up after bounded retries."""


class GirthViolationError(CircuitForgeError):
    """A circuit (or lattice vector) below the promised size was found."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class UniquenessViolationError(GirthViolationError):
    """Two admissible small projections exist on one subtree."""


class SizeError(CircuitForgeError):
    """Circuit is larger than the enumeration threshold."""


class EntryError(CircuitForgeError):
    """Matrix entry outside {-1, 0, 1}."""


class TUViolationError(CircuitForgeError):
    """Matrix behaved in a way impossible for a totally unimodular matrix."""


class ShapeError(CircuitForgeError):
    """Vectors or matrices of incompatible shape."""


class FormatError(CircuitForgeError):
    """Malformed input file; carries 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column
