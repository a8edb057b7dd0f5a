"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates an operation's precondition."""


class AlreadyCollapsed(RuntimeError):
    """A half of an entangled pair was measured twice."""


class ConfigError(InvalidArgument):
    """A scenario configuration failed validation.

    ``field`` names the offending configuration key so callers (the CLI in
    particular) can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
