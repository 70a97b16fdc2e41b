"""Exception hierarchy shared by every loopline module."""


class LooplineError(Exception):
    """Base class for all loopline errors."""


class PreconditionError(LooplineError):
    """An input violated a mathematical precondition (CLI exit code 3)."""


class NotUnimodular(PreconditionError):
    pass


class NotSymmetrizable(PreconditionError):
    pass


class NotIntegrable(PreconditionError):
    pass


class NotHermitian(PreconditionError):
    pass


class SingularAtOne(PreconditionError):
    pass


class NotInZ1(PreconditionError):
    pass


class NotSpecial(PreconditionError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotUnital(PreconditionError):
    pass


class MalformedR(PreconditionError):
    pass


class IllegalMove(LooplineError):
    pass


class UnknownCrossing(LooplineError):
    pass


class TooLarge(LooplineError):
    pass


class InputError(LooplineError):
    """Malformed input file (CLI exit code 2)."""


class PresentationSyntaxError(InputError, SyntaxError):
    """Syntax error in a presentation file, carrying line and column."""

    def __init__(self, message, line, column):
        InputError.__init__(self, f"line {line}, column {column}: {message}")
        self.msg = message
        self.lineno = line
        self.offset = column

    def __str__(self):
        return f"line {self.lineno}, column {self.offset}: {self.msg}"


class DanglingCrossing(InputError):
    pass
