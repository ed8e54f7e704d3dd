"""Exception hierarchy shared by every module of the package."""


class PeciError(Exception):
    """Base class for all errors raised by this package."""


class ConstantInput(PeciError, ValueError):
    """A variable has zero range and cannot be rescaled."""


class InvalidPairs(PeciError, ValueError):
    """Paired samples violate the length/finiteness contract."""


class DegenerateData(PeciError, ValueError):
    """No usable slope information is left after duplicate removal."""


class InvalidSubsampleSize(PeciError, ValueError):
    pass


class AllTasksDegenerate(PeciError, RuntimeError):
    pass


class Saturated(PeciError, ArithmeticError):
    """1 - erf(z) is numerically zero, so the log-domain bound is meaningless."""


class FactorizationFailure(PeciError, ArithmeticError):
    pass


class ParseError(PeciError, ValueError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class TooFewRows(ParseError):
    pass
