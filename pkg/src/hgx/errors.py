"""Exception types that map onto the CLI's exit codes."""


class HgxError(Exception):
    """Base class for all package errors."""


class ConfigError(HgxError, ValueError):
    """Invalid configuration value or unknown option (CLI exit code 2)."""


class DatasetError(HgxError, ValueError):
    """Invalid dataset, hypergraph, or file contents (CLI exit code 3)."""


class VerificationError(HgxError):
    """A verification check failed (CLI exit code 4)."""
