"""Exception hierarchy shared by every module.

Each exception carries a short machine-readable ``code`` and the process
exit code used by the command-line front end (2 usage, 3 data/format,
4 numeric).
"""


class ToolkitError(Exception):
    exit_code = 3
    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class UsageError(ToolkitError):
    """Bad arguments or bad combinations of options."""

    exit_code = 2
    code = "usage"


class DataError(ToolkitError):
    """Inconsistent data: unknown ids, label out of range, bad pairing."""

    exit_code = 3
    code = "data"


class StoreFormatError(ToolkitError):
    """Malformed store or head file.

    Codes: ``bad-magic``, ``bad-version``, ``duplicate-id``,
    ``non-finite``, ``truncated``, ``dim-mismatch``.
    """

    exit_code = 3
    code = "format"


class DimensionError(ToolkitError):
    """Vector/matrix shape disagreement."""

    exit_code = 3
    code = "dimension"


class NumericError(ToolkitError):
    """Degenerate numeric situation, e.g. a zero-norm vector where a
    cosine is required."""

    exit_code = 4
    code = "numeric"
