"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so raising the right class
matters more than the message wording: DataError -> 4, ConfigError -> 3,
RunError -> 2, anything else -> 1.
"""


class UsprivacyError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class DataError(UsprivacyError):
    """A corpus, dictionary, or checkpoint failed validation."""

    exit_code = 4


class ConfigError(UsprivacyError):
    """Bad configuration: unusable flag values, missing files, bad keys."""

    exit_code = 3


class RunError(UsprivacyError):
    """A requested run cannot be carried out (e.g. not enough negatives)."""

    exit_code = 2
