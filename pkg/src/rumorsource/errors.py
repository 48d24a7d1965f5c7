"""Exception hierarchy shared by every module."""


class RumorSourceError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class DomainError(RumorSourceError, ValueError):
    """Input outside an operation's domain (bad root, disconnected set, ...)."""


class ParseError(RumorSourceError, ValueError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ConstructionError(RumorSourceError, RuntimeError):
    """A generator could not build a graph satisfying its contract."""


class ConfigError(RumorSourceError, ValueError):
    pass


class ExperimentAborted(RumorSourceError, RuntimeError):
    """Too many invalid trials (e.g. the rumor reached a truncated host boundary)."""
