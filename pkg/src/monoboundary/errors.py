"""Error types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, InputFormatError
exits 2, CapacityError exits 3.
"""


class InputFormatError(ValueError):
    """Malformed input: presentation files, IFS files, words, or arguments
    that violate an operation's preconditions."""


class CapacityError(RuntimeError):
    """A configured resource cap was exceeded on an exponential path."""

    def __init__(self, message: str, depth_reached: int | None = None):
        super().__init__(message)
        self.depth_reached = depth_reached
