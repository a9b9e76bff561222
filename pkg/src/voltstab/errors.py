"""Exception hierarchy shared by every voltstab module."""


class VoltstabError(Exception):
    """Base class for all errors raised by voltstab."""


class InvalidNetwork(VoltstabError, ValueError):
    """Network parameters violate the R = X assumption of the two-node algebra."""


class DomainError(VoltstabError, ValueError):
    """An argument lies outside the domain of a formula (negative voltage, arccos > 1, ...)."""


class NoRealPositiveRoot(VoltstabError, ArithmeticError):
    """The coupled power-flow constraint has no admissible real positive voltage."""


class DegenerateInput(VoltstabError, ValueError):
    """A polynomial with every coefficient equal to zero."""


class NoSignChange(VoltstabError, ValueError):
    """A bracket whose endpoints do not straddle a root."""


class UnknownTarget(VoltstabError, KeyError):
    """A disturbance names a parameter that the model does not have."""


class ConfigError(VoltstabError, ValueError):
    """A scenario is malformed or violates an invariant.

    ``line`` is the 1-based line in the scenario file the problem was traced to,
    when there is one.
    """

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(self.__str__())

    def __str__(self) -> str:
        where = self.source or "<scenario>"
        if self.line is not None:
            return f"{where}:{self.line}: {self.message}"
        if self.source is not None:
            return f"{where}: {self.message}"
        return self.message
