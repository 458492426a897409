"""Exception types raised across the package.

Each error carries a short machine-readable ``code`` so the CLI and reports
can print a stable tag next to the human message.
"""


class LamdynError(Exception):
    code = "ERROR"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def __str__(self):
        return f"{self.code}: {self.args[0]}"


class UndecidedAtPrecision(LamdynError):
    """Two stream angles agree on every digit inside the precision budget."""

    code = "UNDECIDED-AT-PRECISION"


class AmbiguousPullback(LamdynError):
    code = "AMBIGUOUS-PULLBACK"


class ForwardOrbitDiverges(LamdynError):
    code = "FORWARD-ORBIT-DIVERGES"


class NotATree(LamdynError):
    code = "NOT-A-TREE"


class Frontier(LamdynError):
    """A query needed a class that lies beyond the stored depth."""

    code = "FRONTIER"


class InsufficientWitnesses(LamdynError):
    code = "INSUFFICIENT-WITNESSES"


class BoundExceeded(LamdynError):
    code = "BOUND-EXCEEDED"


class PreconditionFailed(LamdynError):
    code = "PRECONDITION-FAILED"


class ParseError(LamdynError):
    code = "PARSE-ERROR"

    def __init__(self, message, line=None, column=None, token=None):
        super().__init__(message, line=line, column=column, token=token)
        self.line = line
        self.column = column
        self.token = token

    def __str__(self):
        where = ""
        if self.line is not None:
            where = f" (line {self.line}, column {self.column})"
        return f"{self.code}: {self.args[0]}{where}"
