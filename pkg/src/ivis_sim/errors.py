"""Shared error base for configuration and input-file problems."""


class SimConfigError(ValueError):
    """A profile, table, procedure, scenario, or trace file failed to parse
    or validate.  The CLI maps these to exit code 3."""
