"""Exception hierarchy shared by all modules."""


class CMReduceError(Exception):
    pass


class NotAUnit(CMReduceError, ValueError):
    """Raised when an order is requested for a residue that is not invertible."""


class RamifiedPrime(CMReduceError, ValueError):
    pass


class ContextMismatch(CMReduceError, TypeError):
    pass


class FieldDivisionByZero(CMReduceError, ZeroDivisionError):
    pass


class RangeOverflow(CMReduceError, OverflowError):
    pass


class BudgetExceeded(CMReduceError):
    pass


class BadReduction(CMReduceError, ValueError):
    pass


class InexactDivision(CMReduceError, ArithmeticError):
    """A Newton-identity division left a remainder: the counts are not those of a curve."""


class WeilViolation(CMReduceError, ValueError):
    pass
