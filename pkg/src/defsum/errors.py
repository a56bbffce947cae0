"""Exception hierarchy for defsum."""


class DefsumError(Exception):
    """Base class for all defsum errors."""


class ScheduleError(DefsumError, ValueError):
    """A deferment schedule violates p(n) < q(n) (or p(n) >= 0) at some n."""

    def __init__(self, n: int, message: str):
        super().__init__(f"schedule invalid at n={n}: {message}")
        self.n = n


class EmptyStreamError(DefsumError, ValueError):
    """detect_limit was handed a stream with no values."""


class TailOracleError(DefsumError):
    """A row tail cannot be computed with a guaranteed error bound."""


class ConfigError(DefsumError, ValueError):
    """A run configuration field is missing, unknown or out of range."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
