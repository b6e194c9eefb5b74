"""Exception types shared across the package."""


class FloatlabError(Exception):
    """Base class for package errors."""


class ConfigError(FloatlabError):
    """Invalid configuration document or parameter combination."""


class ResourceError(FloatlabError):
    """A required external resource (font file, frame directory) is missing."""


class OcrEngineError(FloatlabError):
    """External OCR process failed or produced unparseable output."""

    def __init__(self, message: str, *, command: str | None = None,
                 exit_code: int | None = None, stderr: str | None = None):
        super().__init__(message)
        self.command = command
        self.exit_code = exit_code
        self.stderr = stderr
