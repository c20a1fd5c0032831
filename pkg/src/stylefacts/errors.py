"""Exception types that map onto the CLI exit codes."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit code 1)."""


class DataError(Exception):
    """Input data could not be ingested or segmented (exit code 2)."""
