"""Exception hierarchy shared by every module.

Each error carries a stable ``code`` used by the command-line front end.
"""


class CanonError(Exception):
    code = "ERROR"


class FieldMismatch(CanonError, ValueError):
    code = "FIELD_MISMATCH"


class DivisionByZero(CanonError, ZeroDivisionError):
    code = "DIVISION_BY_ZERO"


class FieldNotSplitting(CanonError):
    """An eigenvalue computation left an irreducible factor of degree > 1."""

    code = "FIELD_NOT_SPLITTING"

    def __init__(self, poly, message=None):
        self.poly = poly
        super().__init__(message or f"characteristic polynomial does not split: {poly}")


class Singular(CanonError, ValueError):
    code = "SINGULAR"


class SizeMismatch(CanonError, ValueError):
    code = "SIZE_MISMATCH"


class PartitionMismatch(SizeMismatch):
    code = "PARTITION_MISMATCH"


class NotStepSequence(CanonError, ValueError):
    code = "NOT_STEP_SEQUENCE"


class NotBasic(CanonError, ValueError):
    code = "NOT_BASIC"


class NotClosed(CanonError):
    code = "NOT_CLOSED"

    def __init__(self, witness, message="algebra is not closed under multiplication"):
        self.witness = witness
        super().__init__(message)


class NotNilpotent(CanonError, ValueError):
    code = "NOT_NILPOTENT"


class NotLinking(CanonError, ValueError):
    code = "NOT_LINKING"


class NotInvariant(CanonError, ValueError):
    code = "NOT_INVARIANT"


class BadIndexing(CanonError, ValueError):
    code = "BAD_INDEXING"


class NotInSpace(CanonError, ValueError):
    code = "NOT_IN_SPACE"


class TemplateMismatch(CanonError, ValueError):
    code = "TEMPLATE_MISMATCH"


class NotCanonical(CanonError):
    code = "NOT_CANONICAL"

    def __init__(self, box, condition, message=None):
        self.box = box
        self.condition = condition
        super().__init__(message or f"box {box} violates condition ({condition})")


class InternalInconsistency(CanonError, AssertionError):
    code = "INTERNAL_INCONSISTENCY"


class BudgetExceeded(CanonError):
    code = "BUDGET_EXCEEDED"


class ParseError(CanonError, ValueError):
    code = "PARSE"
