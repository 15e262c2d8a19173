"""Exception types shared across the package."""


class OntoExplainError(Exception):
    """Base class for errors raised by this package."""


class FormatError(OntoExplainError, ValueError):
    """A structured-text input failed to parse.

    Carries the source path and 1-based line number when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class OntologyValidationError(OntoExplainError, ValueError):
    """An ontology parsed but violates a structural invariant."""


class DegenerateInputError(OntoExplainError, ValueError):
    """Input is legal to pass but too degenerate to operate on.

    Examples: a corpus with a single class, a document with no
    interpretable units.
    """


class AdapterProtocolError(OntoExplainError, RuntimeError):
    """The external model process violated the wire protocol."""
