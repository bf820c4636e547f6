"""Error hierarchy; the CLI maps these onto exit codes."""


class EmbedderError(Exception):
    """Base class for failures raised by this package."""


class ParseError(EmbedderError, ValueError):
    """A line of the input file is not valid JSON."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ValidationError(EmbedderError, ValueError):
    """A record or argument violates the input contract."""


class EncoderLoadError(EmbedderError):
    """The embedding model could not be loaded."""
