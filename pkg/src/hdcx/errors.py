"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, ModelFileError -> 4. Programming-contract violations
(dimension mismatches, out-of-range arguments) raise plain ValueError.
"""


class HdcxError(Exception):
    """Base class for errors the CLI turns into non-zero exit codes."""

    exit_code = 1


class ConfigError(HdcxError):
    """Invalid hyperparameter or run configuration."""

    exit_code = 2


class DataError(HdcxError):
    """Dataset ingestion failure (missing column, unparsable cell, ...)."""

    exit_code = 3


class ModelFileError(HdcxError):
    """Model persistence failure (bad magic, version, checksum, truncation)."""

    exit_code = 4
