"""Exception types raised across the package."""


class SafeCheckError(Exception):
    """Base class for every error the library raises on purpose."""


class PolicySyntaxError(SafeCheckError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UndeclaredField(SafeCheckError):
    pass


class ValueOutOfDomain(SafeCheckError):
    pass


class MissingSection(SafeCheckError):
    pass


class UnsupportedConstruct(SafeCheckError):
    pass


class DomainTooLarge(SafeCheckError):
    pass


class MalformedTopology(SafeCheckError):
    pass


class GraphMLParseError(SafeCheckError):
    pass


class EmptyGraph(SafeCheckError):
    pass
