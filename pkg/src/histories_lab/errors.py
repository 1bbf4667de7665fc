"""Exceptions raised across the package.

Every class carries a short machine-readable ``code``; the CLI prints
failures as single ``error[CODE]: message`` lines and maps codes to exit
statuses.
"""


class HistoriesError(Exception):
    """Base class for every error raised by this package."""

    code = "ERROR"


class DimensionMismatch(HistoriesError):
    code = "DIMENSION_MISMATCH"


class NotHermitian(HistoriesError):
    code = "NOT_HERMITIAN"


class NotUnitary(HistoriesError):
    code = "NOT_UNITARY"

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NotNormalized(HistoriesError):
    code = "NOT_NORMALIZED"


class NotProjector(HistoriesError):
    code = "NOT_PROJECTOR"

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NotOrthogonal(HistoriesError):
    code = "NOT_ORTHOGONAL"

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class Incomplete(HistoriesError):
    code = "INCOMPLETE"

    def __init__(self, message: str, deficit: float | None = None):
        super().__init__(message)
        self.deficit = deficit


class TooLarge(HistoriesError):
    code = "TOO_LARGE"


class BadLabel(HistoriesError):
    code = "BAD_LABEL"


class InvalidSlot(HistoriesError):
    code = "INVALID_SLOT"

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class Meaningless(HistoriesError):
    """AND/OR of noncommuting projectors carries no meaning.

    Distinct from a false statement (the zero projector): there is no value
    at all.  Carries the commutator norm that triggered the refusal.
    """

    code = "MEANINGLESS"

    def __init__(self, message: str, commutator_norm: float):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class Incompatible(HistoriesError):
    """Two frameworks contain noncommuting projectors; no common refinement."""

    code = "INCOMPATIBLE"


class Inconsistent(HistoriesError):
    """Probabilities were requested for a family whose chain kets overlap."""

    code = "INCONSISTENT"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class StructureMismatch(HistoriesError):
    code = "STRUCTURE_MISMATCH"


class ZeroProbabilityCondition(HistoriesError):
    code = "ZERO_PROBABILITY_CONDITION"


class SingleFrameworkViolation(HistoriesError):
    """A query referenced an event outside the family's own event algebra."""

    code = "SINGLE_FRAMEWORK_VIOLATION"


class InapplicableFramework(HistoriesError):
    code = "INAPPLICABLE_FRAMEWORK"


class UnknownScenario(HistoriesError):
    code = "UNKNOWN_SCENARIO"


class ParseError(HistoriesError):
    code = "PARSE"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            where = f"line {line}" + (f", col {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class UndefinedName(ParseError):
    code = "UNDEFINED_NAME"


class DuplicateName(ParseError):
    code = "DUPLICATE_NAME"
