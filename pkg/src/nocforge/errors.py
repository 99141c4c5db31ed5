"""Exception types shared across the toolchain.

Kept in one place so the CLI can map them onto stable exit codes.
"""


class ValidationError(ValueError):
    """Bad user input: malformed config, out-of-range parameter, unknown field."""


class PipelineError(RuntimeError):
    """A pipeline stage could not produce a result from valid-looking inputs."""


class DeadlockError(RuntimeError):
    """The cycle-level simulator detected a routing deadlock."""

    def __init__(self, message: str, cycle: int = -1):
        super().__init__(message)
        self.cycle = cycle
