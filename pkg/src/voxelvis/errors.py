"""Exception types shared across the engine."""


class ConfigError(ValueError):
    """Invalid grid/engine configuration (bad spans, unknown keys, ...)."""


class ParseError(ValueError):
    """Malformed input file. Carries the byte offset or record index when known."""

    def __init__(self, message: str, *, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
