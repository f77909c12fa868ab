"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user input, tagged with the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        if achieved is not None:
            message = f"{message} (achieved tolerance {achieved:.3g})"
        super().__init__(message)
