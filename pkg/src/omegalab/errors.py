"""Exception types shared across the package."""


class OmegalabError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OmegalabError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class LevelViolation(OmegalabError):
    """A formula or abstract exceeds the parameter-free level allowed here."""


class NotPositive(OmegalabError):
    """The distinguished set variable has a negative occurrence."""


class InvalidDerivation(OmegalabError):
    """A derivation failed kernel checking where a valid one was required."""


class InvalidPartition(OmegalabError):
    pass


class NotCutFree(OmegalabError):
    pass


class MissingPremise(OmegalabError):
    pass


class InvalidCertificate(OmegalabError):
    pass


class NotAPartialOrder(OmegalabError):
    pass


class NotHeyting(OmegalabError):
    pass


class NotAHeytingFrame(OmegalabError):
    def __init__(self, law, detail=""):
        self.law = law
        super().__init__(f"not a Heyting frame: {law}" + (f" ({detail})" if detail else ""))


class SizeBound(OmegalabError):
    pass


class IndexOutOfRange(OmegalabError):
    pass


class UncoveredVariable(OmegalabError):
    pass


class UnknownFunctionSymbol(OmegalabError):
    pass
